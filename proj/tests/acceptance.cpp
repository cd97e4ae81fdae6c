// Acceptance run: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <sys/wait.h>

#include "test_support.hpp"

using namespace polyvar;
using namespace polyvar::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double x, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

PeriodicEnvironment random_environment(std::mt19937_64& g) {
  std::uniform_int_distribution<int> pd(1, 4);
  std::uniform_real_distribution<double> wd(-1.0, 1.0);
  std::int64_t p1, p2;
  do {
    p1 = pd(g);
    p2 = pd(g);
  } while (p1 * p2 > 8);
  PeriodicEnvironment env{2, {p1, p2}, {}};
  for (std::int64_t i = 0; i < p1 * p2; ++i) env.weights.push_back(wd(g));
  return env;
}

double spread(const std::vector<double>& v) {
  return *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
}

// 1. Stripes: eigenvalue, eigenvector and case (ii) Busemann oscillation.
Outcome stripes_exactness() {
  Outcome o;
  const auto q = stripes();
  double worst_lambda = 0.0, worst_sigma = 0.0;
  int oscillations = 0, case_two = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double h1 = -1.0 + 0.5 * i, h2 = -1.0 + 0.5 * j;
      const auto a = build_maxplus_matrix(q, Tilt{{h1, h2}});
      const double lambda = karp_eigenvalue(a);
      worst_lambda = std::max(worst_lambda, std::abs(lambda - std::max(0.5 + h1, 1.0 + h2)));
      const auto e = eigenvector_and_critical_graph(a, lambda);
      const bool first = 0.5 + h1 <= 1.0 + h2;
      // sigma = (1, h1 - h2) in case (i), (1, 1/2) in case (ii)
      const double expected = first ? (h1 - h2) - 1.0 : 0.5 - 1.0;
      worst_sigma = std::max(worst_sigma, std::abs((e.sigma[1] - e.sigma[0]) - expected));
      if (!first) {
        ++case_two;
        const auto b = busemann_maxplus(a, 40);
        bool ok = true;
        for (std::size_t w = 0; w < 2; ++w) {
          const auto& entry = b.entries[w][1];
          auto c = entry.cycle;
          std::sort(c.begin(), c.end());
          ok = ok && !entry.limit && entry.period == 2 && c.size() == 2 && std::abs(c[0] - h1) <= 1e-12 &&
               std::abs(c[1] - (h1 + 1.0)) <= 1e-12;
        }
        oscillations += ok;
      }
    }
  o.pass = worst_lambda <= 1e-12 && worst_sigma <= 1e-9 && oscillations == case_two && case_two > 0;
  o.detail = "max|lambda err|=" + fmt(worst_lambda) + " max|sigma err|=" + fmt(worst_sigma) +
             " oscillating " + std::to_string(oscillations) + "/" + std::to_string(case_two);
  return o;
}

// 2. Karp, circuit enumeration and min-max agree.
Outcome three_way_agreement() {
  std::mt19937_64 g(2024);
  double worst_circ = 0.0, worst_mm = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto q = random_quotient(g);
    const auto h = random_tilt(g);
    const auto a = build_maxplus_matrix(q, h);
    const double k = karp_eigenvalue(a);
    worst_circ = std::max(worst_circ, std::abs(k - measure_variational_value(enumerate_circuits(a))));
    worst_mm = std::max(worst_mm, std::abs(k - minmax_via_difference_constraints(a).value));
  }
  return {worst_circ <= 1e-9 && worst_mm <= 1e-9,
          "max|karp-circuits|=" + fmt(worst_circ) + " max|karp-minmax|=" + fmt(worst_mm)};
}

struct RandomPfCase {
  QuotientSpace q;
  Tilt h;
  double beta;
};

std::vector<RandomPfCase> random_pf_cases() {
  std::mt19937_64 g(303);
  std::uniform_real_distribution<double> bd(0.5, 8.0);
  std::vector<RandomPfCase> out;
  for (int t = 0; t < 100; ++t) {
    auto q = random_quotient(g);
    auto h = random_tilt(g);
    out.push_back({std::move(q), std::move(h), bd(g)});
  }
  return out;
}

// 3. The corrector makes the bracket constant; random gradients never beat it.
Outcome corrector_constancy() {
  std::mt19937_64 g(304);
  std::normal_distribution<double> nd(0.0, 2.0);
  double worst_const = 0.0, worst_gap = 0.0, worst_dense = 0.0;
  for (const auto& c : random_pf_cases()) {
    const auto s = solve_pf(build_log_transfer_matrix(c.q, c.h, c.beta));
    const auto b = cocycle_brackets(c.q, c.h, c.beta, corrector_from_rev(s));
    worst_const = std::max(worst_const, spread(b));
    const double dense = std::log(dense_spectral_radius(dense_transfer(c.q, c.h, c.beta)));
    worst_dense = std::max(worst_dense, std::abs(dense - s.log_rho) / std::max(1.0, std::abs(dense)));
    for (int k = 0; k < 100; ++k) {
      GradientCocycle f;
      for (std::size_t w = 0; w < c.q.size(); ++w) f.f.push_back(nd(g));
      worst_gap = std::min(worst_gap, evaluate_cocycle_formula(c.q, c.h, c.beta, f) - s.g_pl);
    }
  }
  return {worst_const <= 1e-9 && worst_gap >= -1e-12 && worst_dense <= 1e-9,
          "max bracket spread=" + fmt(worst_const) + " min(random value - g_pl)=" + fmt(worst_gap) +
              " max|log rho - dense|=" + fmt(worst_dense)};
}

// 4. Positive-temperature free energy sits in the zero-temperature sandwich.
Outcome beta_sandwich() {
  std::mt19937_64 g(404);
  std::vector<std::pair<QuotientSpace, Tilt>> cases{{stripes(), Tilt{{0, 0}}}, {stripes(), Tilt{{1, 0}}}};
  for (int t = 0; t < 20; ++t) {
    auto q = random_quotient(g);
    auto h = random_tilt(g);
    cases.emplace_back(std::move(q), std::move(h));
  }
  double worst_above = -1e300, worst_below = -1e300;
  for (const auto& [q, h] : cases) {
    const double lam = karp_eigenvalue(build_maxplus_matrix(q, h));
    for (double beta = 1.0; beta <= 256.0; beta *= 2.0) {
      const double gb = solve_pf(build_log_transfer_matrix(q, h, beta)).g_pl;
      worst_above = std::max(worst_above, gb - lam);
      worst_below = std::max(worst_below, (lam - std::log(2.0) / beta) - gb);
    }
  }
  return {worst_above <= 1e-12 && worst_below <= 1e-12,
          "max(g_beta - lambda)=" + fmt(worst_above) + " max(lower - g_beta)=" + fmt(worst_below)};
}

// 5. Energy minus entropy equals the free energy.
Outcome entropy_identity() {
  double worst_gap = 0.0, min_h = 1e300, max_h = -1e300;
  for (const auto& c : random_pf_cases()) {
    const auto e = invariant_measure_and_entropy(c.q, solve_pf(build_log_transfer_matrix(c.q, c.h, c.beta)));
    worst_gap = std::max(worst_gap, e.identity_gap);
    min_h = std::min(min_h, e.entropy);
    max_h = std::max(max_h, e.entropy);
  }
  return {worst_gap <= 1e-9 && min_h >= -1e-12 && max_h <= std::log(2.0) + 1e-12,
          "max gap=" + fmt(worst_gap) + " H in [" + fmt(min_h) + ", " + fmt(max_h) + "]"};
}

// 6. Busemann limits recover the potential at every state.
Outcome recovery_property() {
  std::mt19937_64 g(606);
  double worst_pf = 0.0, worst_mp = 0.0;
  int pf_cases = 0, mp_cases = 0, mp_missing = 0;
  for (int t = 0; t < 100; ++t) {
    const auto q = random_quotient(g);
    const auto h = random_tilt(g);
    if (transfer_period(q) == 1) {
      const auto b = busemann_pf(q, h, std::uniform_real_distribution<double>(0.5, 8.0)(g), 2000);
      worst_pf = std::max(worst_pf, b.recovery_residual);
      ++pf_cases;
    }
    const auto a = build_maxplus_matrix(q, h);
    const auto bus = busemann_maxplus(a, 2000);
    if (!bus.eigen.primitive) continue;
    ++mp_cases;
    for (std::size_t w = 0; w < q.size(); ++w) {
      double mn = 1e300;
      bool have = true;
      for (std::size_t k = 0; k < q.steps().size(); ++k) {
        const auto& e = bus.entries[w][k];
        if (!e.limit) {
          have = false;
          break;
        }
        mn = std::min(mn, *e.limit - h.dot(q.steps()[k]));
      }
      if (!have) {
        ++mp_missing;
        continue;
      }
      worst_mp = std::max(worst_mp, std::abs(mn - q.v0(w)));
    }
  }
  return {worst_pf <= 1e-8 && worst_mp <= 1e-9 && mp_missing == 0 && pf_cases > 0 && mp_cases > 0,
          "finite beta: " + std::to_string(pf_cases) + " cases, max residual=" + fmt(worst_pf) +
              "; zero temperature: " + std::to_string(mp_cases) + " primitive cases, max residual=" +
              fmt(worst_mp) + ", missing limits=" + std::to_string(mp_missing)};
}

McOptions mc_options() { return {20, 42, worker_count()}; }

// 7. Exponential corner growth against the Rost shape.
Outcome rost_shape() {
  const auto steps = StepSet::unit_steps(2);
  Outcome o;
  double worst = 0.0;
  for (double s : {0.25, 0.5, 0.75}) {
    const auto e = estimate_gpp(DistributionSpec::exponential(), kInfiniteBeta,
                                Velocity::from_weights(steps, {s, 1.0 - s}), 2000, mc_options());
    const double err = std::abs(e.mean - rost_gpp(s));
    worst = std::max(worst, err);
    o.detail += "s=" + fmt(s, 3) + ": " + fmt(e.mean) + " vs " + fmt(rost_gpp(s)) + "; ";
  }
  o.pass = worst <= 0.05;
  o.detail += "max abs err=" + fmt(worst);
  return o;
}

// 8. Log-gamma polymer at the symmetric point and on a coarse grid.
Outcome loggamma_symmetric() {
  const auto steps = StepSet::unit_steps(2);
  const LogGammaModel m{1.0};
  Outcome o;
  double sym_rel = 0.0, grid_rel = 0.0;
  for (double s : {0.3, 0.5, 0.7}) {
    const auto e = estimate_gpp(DistributionSpec::log_gamma(1.0), 1.0, Velocity::from_weights(steps, {s, 1.0 - s}),
                                1000, mc_options());
    const double exact = s == 0.5 ? kEulerGamma + 2.0 * std::log(2.0) : loggamma_gpp(m, s);
    const double rel = std::abs(e.mean - exact) / exact;
    if (s == 0.5) sym_rel = rel;
    grid_rel = std::max(grid_rel, rel);
    o.detail += "s=" + fmt(s, 2) + ": " + fmt(e.mean) + " vs " + fmt(exact) + "; ";
  }
  o.pass = sym_rel <= 0.03 && grid_rel <= 0.05;
  o.detail += "symmetric rel err=" + fmt(sym_rel) + " grid max rel err=" + fmt(grid_rel);
  return o;
}

// 9. Busemann gradient means.
Outcome busemann_means() {
  const auto steps = StepSet::unit_steps(2);
  const auto pp = estimate_busemann_pp(DistributionSpec::exponential(), kInfiniteBeta,
                                       Velocity::from_weights(steps, {0.5, 0.5}), staircase_pairs(200, {1, 0}),
                                       2000, mc_options());
  const double target_pp = 1.0 / exp_alpha(0.5);
  const double rel_pp = std::abs(pp.pooled[0].mean - target_pp) / target_pp;
  const LogGammaModel m{1.0};
  const auto dual = loggamma_duality(m, 0.5);
  const auto pl = estimate_busemann_pl(DistributionSpec::log_gamma(1.0), 1.0, dual.h, 1000, 200, mc_options());
  const double target_pl = loggamma_gpl(m, dual.h);
  double rel_pl = 0.0;
  for (const auto& e : pl.per_step) rel_pl = std::max(rel_pl, std::abs(e.mean - target_pl) / target_pl);
  return {rel_pp <= 0.05 && rel_pl <= 0.05 && pl.bound_violations == 0,
          "pp e1: " + fmt(pp.pooled[0].mean) + " vs " + fmt(target_pp) + " (rel " + fmt(rel_pp) + "); pl: " +
              fmt(pl.per_step[0].mean) + ", " + fmt(pl.per_step[1].mean) + " vs " + fmt(target_pl) + " (rel " +
              fmt(rel_pl) + ")"};
}

// 10. Legendre round trips and the gradient identity.
Outcome duality_round_trips() {
  const auto pp = FreeEnergyCurve::sample(0.0, 1.0, 4001, rost_gpp);
  const auto pl = FreeEnergyCurve::sample(-6.0, 6.0, 4001, [&](double h1) {
    return legendre_pl_from_pp(pp, Tilt{{h1, 0.0}}).value;
  });
  double rost_err = 0.0;
  for (double s = 0.1; s < 0.91; s += 0.1) rost_err = std::max(rost_err, std::abs(legendre_pp_from_pl(pl, s).value - rost_gpp(s)));

  double lg_err = 0.0;
  for (double rho : {0.5, 1.0, 2.0}) {
    const LogGammaModel m{rho};
    for (double s = 0.1; s < 0.91; s += 0.1) {
      const auto d = loggamma_duality(m, s);
      lg_err = std::max(lg_err, d.duality_residual);
      const double reach = std::abs(d.h.h[0]) + 1.0;
      const auto curve = FreeEnergyCurve::sample(-2.0 * reach, 2.0 * reach, 4001,
                                                 [&](double h1) { return loggamma_gpl(m, Tilt{{h1, 0.0}}); });
      lg_err = std::max(lg_err, std::abs(legendre_pp_from_pl(curve, s).value - loggamma_gpp(m, s)));
    }
  }

  double grad_err = 0.0;
  const double e = 1e-5;
  for (double s = 0.05; s < 0.96; s += 0.05) {
    const auto h = exp_dual_tilt(s);
    grad_err = std::max(grad_err, std::abs((rost_gpp(s + e) - rost_gpp(s - e)) / (2.0 * e) + (h.h[0] - h.h[1])));
  }
  return {rost_err <= 1e-6 && lg_err <= 1e-6 && grad_err <= 1e-6,
          "rost round trip=" + fmt(rost_err) + " log-gamma=" + fmt(lg_err) + " gradient=" + fmt(grad_err)};
}

// 11. Dynamic programming against enumeration, and the periodic C/n rate.
Outcome brute_force() {
  std::mt19937_64 g(1111);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto f = sample_field(t % 2 ? DistributionSpec::exponential() : DistributionSpec::normal_truncated(-2, 2), 10, g());
    const auto h = random_tilt(g);
    std::uniform_int_distribution<std::int64_t> d(0, 5);
    const Site y{d(g), d(g)};
    for (double beta : {0.5, 1.0, 3.0, kInfiniteBeta}) {
      worst = std::max(worst, std::abs(dp_point_to_point(f, beta, {0, 0}, y) - brute_point_to_point(f, beta, y)));
      const auto n = static_cast<std::size_t>(1 + t % 10);
      worst = std::max(worst, std::abs(dp_point_to_level(f, beta, h, static_cast<std::int64_t>(n)) -
                                       brute_point_to_level([&](const Site& x) { return f.at(x); }, beta, h, n)));
    }
  }
  double worst_rate = -1e300;
  for (int t = 0; t < 20; ++t) {
    const auto env = random_environment(g);
    const auto q = build_quotient(env, StepSet::unit_steps(2));
    const auto h = random_tilt(g);
    const auto a = build_maxplus_matrix(q, h);
    const double lam = karp_eigenvalue(a);
    const double c = spread(eigenvector_and_critical_graph(a, lam).sigma);
    const auto f = periodic_field(env, 400);
    for (std::int64_t n : {10, 50, 100, 200, 400}) {
      const double gn = dp_point_to_level(f, kInfiniteBeta, h, n);
      worst_rate = std::max(worst_rate, std::abs(gn / static_cast<double>(n) - lam) - (c + 1e-9) / static_cast<double>(n));
    }
  }
  return {worst <= 1e-10 && worst_rate <= 0.0,
          "max|DP - enumeration|=" + fmt(worst) + " max(|G_n/n - lambda| - C/n)=" + fmt(worst_rate)};
}

int run_shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 12. Identical seeds give byte-identical CSV from the CLI binary.
Outcome reproducibility(const std::string& cli, const std::string& configs) {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "polyvar_acceptance";
  fs::create_directories(dir);
  Outcome o;
  int compared = 0;
  for (const auto& [cmd, cfg] : std::vector<std::pair<std::string, std::string>>{
           {"mc", "mc_small.json"}, {"periodic", "stripes_h0.json"}, {"duality", "duality_rost.json"}}) {
    const auto a = (dir / (cfg + ".a.csv")).string(), b = (dir / (cfg + ".b.csv")).string();
    const std::string base = cli + " " + cmd + " --config " + configs + "/" + cfg;
    const int ra = run_shell(base + " --seed 123 --threads 1 --out " + a + " 2>/dev/null");
    const int rb = run_shell(base + " --seed 123 --threads 4 --out " + b + " 2>/dev/null");
    const auto sa = slurp(a), sb = slurp(b);
    const bool same = ra == 0 && rb == 0 && !sa.empty() && sa == sb;
    o.pass = o.pass && same;
    compared += same;
    o.detail += cfg + (same ? " identical; " : " DIFFERENT; ");
  }
  fs::remove_all(dir);
  o.detail += std::to_string(compared) + "/3 identical";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cli, configs;
  app.add_option("--cli", cli, "path to the polyvar binary")->required();
  app.add_option("--configs", configs, "directory with sample configs")->required();
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    const char* name;
    double limit_seconds;  // 0 for none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"stripes exactness", 1.0, stripes_exactness},
      {"three-way eigenvalue agreement", 30.0, three_way_agreement},
      {"corrector constancy", 0.0, corrector_constancy},
      {"beta sandwich", 10.0, beta_sandwich},
      {"entropy identity", 0.0, entropy_identity},
      {"recovery property", 0.0, recovery_property},
      {"Rost shape", 120.0, rost_shape},
      {"log-gamma symmetric point", 120.0, loggamma_symmetric},
      {"Busemann means", 0.0, busemann_means},
      {"duality round trips", 0.0, duality_round_trips},
      {"brute-force equivalence", 0.0, brute_force},
      {"reproducibility", 0.0, [&] { return reproducibility(cli, configs); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds > 0.0 && secs >= c.limit_seconds) {
      o.pass = false;
      o.detail += " (over the " + fmt(c.limit_seconds) + " s limit)";
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << c.name << ": " << o.detail << " ("
              << fmt(secs, 3) << " s)" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
