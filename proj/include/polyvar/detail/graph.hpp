#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace polyvar::detail {

using Adjacency = std::vector<std::vector<std::size_t>>;

/// Strongly connected components (Tarjan). Components are returned with
/// their nodes sorted, ordered by smallest node.
inline std::vector<std::vector<std::size_t>> strongly_connected_components(const Adjacency& adj) {
  const std::size_t n = adj.size();
  constexpr std::size_t unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, unset), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> comps;
  std::size_t counter = 0;

  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (auto w : adj[v]) {
      if (index[w] == unset) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      comps.push_back(std::move(comp));
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] == unset) visit(v);
  std::sort(comps.begin(), comps.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return comps;
}

/// Period (gcd of cycle lengths) of the subgraph induced by a strongly
/// connected node set. Returns 0 when the set carries no cycle.
inline std::size_t cyclicity(const Adjacency& adj, const std::vector<std::size_t>& nodes) {
  if (nodes.empty()) return 0;
  const std::size_t n = adj.size();
  std::vector<bool> in(n, false);
  for (auto v : nodes) in[v] = true;
  constexpr long unset = -1;
  std::vector<long> level(n, unset);
  std::deque<std::size_t> queue{nodes.front()};
  level[nodes.front()] = 0;
  std::size_t g = 0;
  bool any_edge = false;
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    for (auto v : adj[u]) {
      if (!in[v]) continue;
      any_edge = true;
      if (level[v] == unset) {
        level[v] = level[u] + 1;
        queue.push_back(v);
      } else {
        const long diff = level[u] + 1 - level[v];
        g = std::gcd(g, static_cast<std::size_t>(diff < 0 ? -diff : diff));
      }
    }
  }
  return any_edge ? g : 0;
}

}  // namespace polyvar::detail
