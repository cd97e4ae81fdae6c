#pragma once

// Subcommands of the polyvar CLI. Each takes a parsed JSON config and writes
// CSV to `out`; progress notes go to `log`. Errors are thrown as polyvar
// exceptions and mapped to exit codes by run_command.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyvar/polyvar.hpp"

namespace polyvar::cli {

using nlohmann::json;
namespace ju = polyvar::json_util;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
};

namespace detail {

inline std::string tilt_text(const Tilt& h) { return format_vector(h.h); }

inline Tilt read_tilt(const json& j, std::size_t dim, const std::string& where) {
  Tilt h{ju::numbers(j, where)};
  if (h.h.size() != dim) throw ConfigError(where + ": expected " + std::to_string(dim) + " entries");
  return h;
}

inline double read_beta(const json& j, const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInfiniteBeta;
    throw ConfigError(where + ": expected a positive number or \"inf\"");
  }
  const double b = ju::number(j, where);
  if (!(b > 0.0)) throw ConfigError(where + ": must be positive");
  return b;
}

inline std::uint64_t read_seed(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ConfigError(where + ": expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

inline std::size_t read_count(const json& j, const char* key, const std::string& where,
                              std::int64_t min_value) {
  const auto v = ju::integer(j, key, where);
  if (v < min_value)
    throw ConfigError(where + "." + key + ": must be >= " + std::to_string(min_value));
  return static_cast<std::size_t>(v);
}

// xi = (s, 1 - s) for unit steps in d = 2 uses the weights directly, other
// cases go through the interior LP.
inline Velocity read_velocity(const json& j, const StepSet& steps, const std::string& where) {
  const auto xi = ju::numbers(j, where);
  if (xi.size() != steps.dimension())
    throw ConfigError(where + ": expected " + std::to_string(steps.dimension()) + " entries");
  if (steps.dimension() == 2 && steps.size() == 2 && steps[0] == Site{1, 0} &&
      steps[1] == Site{0, 1} && xi[0] >= 0.0 && xi[1] >= 0.0 && std::abs(xi[0] + xi[1] - 1.0) <= 1e-12)
    return Velocity::from_weights(steps, {xi[0], 1.0 - xi[0]});
  try {
    return Velocity::from_xi(steps, xi);
  } catch (const ModelError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace detail

/// periodic: quotient of a periodic environment, max-plus and PF solvers.
/// CSV header: section,h,beta,xi,state,step,quantity,value
inline void cmd_periodic(const json& cfg, std::ostream& out, std::ostream& log, const Overrides&) {
  const std::string where = "config";
  ju::check_keys(cfg, {"environment", "tilts", "betas", "velocities", "n_max", "circuit_cap"}, where);
  const auto doc = load_environment(ju::field(cfg, "environment", where), where + ".environment");
  const auto& steps = doc.steps;
  const auto& tj = ju::field(cfg, "tilts", where);
  if (!tj.is_array() || tj.empty()) throw ConfigError(where + ".tilts: expected a nonempty array");
  std::vector<Tilt> tilts;
  for (std::size_t i = 0; i < tj.size(); ++i)
    tilts.push_back(detail::read_tilt(tj[i], steps.dimension(), where + ".tilts[" + std::to_string(i) + "]"));
  std::vector<double> betas{1.0};
  if (cfg.contains("betas")) {
    betas = ju::numbers(cfg["betas"], where + ".betas");
    for (double b : betas)
      if (!(b > 0.0)) throw ConfigError(where + ".betas: entries must be positive");
  }
  std::vector<Velocity> velocities;
  if (cfg.contains("velocities")) {
    const auto& vj = cfg["velocities"];
    if (!vj.is_array()) throw ConfigError(where + ".velocities: expected an array");
    for (std::size_t i = 0; i < vj.size(); ++i)
      velocities.push_back(detail::read_velocity(vj[i], steps, where + ".velocities[" + std::to_string(i) + "]"));
  }
  const std::size_t n_max = cfg.contains("n_max") ? detail::read_count(cfg, "n_max", where, 2) : 200;
  const std::size_t cap =
      cfg.contains("circuit_cap") ? detail::read_count(cfg, "circuit_cap", where, 1) : kDefaultCircuitCap;

  const auto q = doc.quotient();
  log << "quotient: " << q.size() << " states\n";
  CsvWriter csv(out, {"section", "h", "beta", "xi", "state", "step", "quantity", "value"});
  auto step_name = [&](std::size_t k) {
    std::string s = to_string(steps[k]);
    for (char& c : s)
      if (c == ',') c = ';';
    return s;
  };
  for (std::size_t w = 0; w < q.size(); ++w) {
    csv.row({"quotient", "", "", "", static_cast<unsigned long long>(w), "", "v0", q.v0(w)});
    for (std::size_t k = 0; k < steps.size(); ++k)
      csv.row({"quotient", "", "", "", static_cast<unsigned long long>(w), step_name(k), "shift",
               static_cast<unsigned long long>(q.shift(w, k))});
  }

  for (const auto& h : tilts) {
    const auto ht = detail::tilt_text(h);
    const auto a = build_maxplus_matrix(q, h);
    const double lambda = karp_eigenvalue(a);
    const auto circuits = enumerate_circuits(a, cap);
    const auto mm = minmax_via_difference_constraints(a);
    const auto eig = eigenvector_and_critical_graph(a, lambda);
    auto mp = [&](const char* qty, CsvField v) { csv.row({"maxplus", ht, "inf", "", "", "", qty, std::move(v)}); };
    mp("lambda_karp", lambda);
    if (circuits.complete) mp("lambda_circuits", measure_variational_value(circuits));
    mp("circuits_complete", circuits.complete ? 1 : 0);
    mp("circuit_count", static_cast<unsigned long long>(circuits.circuits.size()));
    mp("lambda_minmax", mm.value);
    mp("primitive", eig.primitive ? 1 : 0);
    mp("critical_components", static_cast<unsigned long long>(eig.components.size()));
    mp("cyclicity", static_cast<unsigned long long>(eig.cyclicity_lcm()));
    mp("eigen_residual", eig.residual);
    mp("degenerate_nodes", static_cast<unsigned long long>(eig.degenerate_nodes.size()));
    mp("recovery_residual", recovery_residual_maxplus(q, h, eig));
    if (!eig.degenerate_nodes.empty())
      log << "warning: near-critical circuits within 1e-9 of lambda at h=" << ht << "\n";
    for (std::size_t w = 0; w < q.size(); ++w) {
      csv.row({"maxplus", ht, "inf", "", static_cast<unsigned long long>(w), "", "sigma", eig.sigma[w]});
      csv.row({"maxplus", ht, "inf", "", static_cast<unsigned long long>(w), "", "minmax_f", mm.f.f[w]});
    }
    const auto bus = busemann_maxplus(a, std::max(n_max, 2 * q.size()));
    for (std::size_t w = 0; w < q.size(); ++w)
      for (std::size_t k = 0; k < steps.size(); ++k) {
        const auto& e = bus.entries[w][k];
        auto row = [&](const char* qty, CsvField v) {
          csv.row({"busemann_maxplus", ht, "inf", "", static_cast<unsigned long long>(w), step_name(k), qty, std::move(v)});
        };
        if (e.limit) {
          row("limit", *e.limit);
          row("matches_formula", e.matches_formula ? 1 : 0);
        } else if (e.period > 1) {
          row("period", static_cast<unsigned long long>(e.period));
          row("cycle", e.cycle);
        } else {
          row("period", 0);
        }
        row("formula", *e.formula);
      }
    log << "h=" << ht << " lambda=" << format_double(lambda) << " primitive=" << eig.primitive
        << " cyclicity=" << eig.cyclicity_lcm() << "\n";

    for (double beta : betas) {
      const auto bt = format_double(beta);
      const auto sol = solve_pf(build_log_transfer_matrix(q, h, beta));
      const auto ent = invariant_measure_and_entropy(q, sol);
      const auto f = corrector_from_rev(sol);
      auto pf = [&](const char* qty, CsvField v) { csv.row({"pf", ht, bt, "", "", "", qty, std::move(v)}); };
      pf("log_rho", sol.log_rho);
      pf("g_pl", sol.g_pl);
      pf("residual", sol.residual);
      pf("cocycle_formula", evaluate_cocycle_formula(q, h, beta, f));
      pf("energy", ent.energy);
      pf("entropy", ent.entropy);
      pf("identity_gap", ent.identity_gap);
      pf("stationarity_error", ent.stationarity_error);
      for (std::size_t w = 0; w < q.size(); ++w) {
        auto srow = [&](const char* qty, double v) {
          csv.row({"pf", ht, bt, "", static_cast<unsigned long long>(w), "", qty, v});
        };
        srow("lev", sol.lev[w]);
        srow("rev", sol.rev[w]);
        srow("mu0", sol.mu0[w]);
        srow("corrector", f.f[w]);
      }
      if (transfer_period(q) == 1) {
        const auto b = busemann_pf(q, h, beta, n_max);
        for (std::size_t w = 0; w < q.size(); ++w)
          for (std::size_t k = 0; k < steps.size(); ++k) {
            csv.row({"busemann_pf", ht, bt, "", static_cast<unsigned long long>(w), step_name(k), "limit", b.limit[w][k]});
            csv.row({"busemann_pf", ht, bt, "", static_cast<unsigned long long>(w), step_name(k), "trace_last",
                     b.trace[w][k].back()});
          }
        pf("busemann_recovery_residual", b.recovery_residual);
      } else {
        pf("busemann_primitive", 0);
      }
    }
  }

  if (!velocities.empty()) {
    const auto circuits = enumerate_circuits(build_maxplus_matrix(q, Tilt{std::vector<double>(steps.dimension(), 0.0)}), cap);
    for (const auto& v : velocities)
      csv.row({"gpp", "", "inf", format_vector(v.xi), "", "", "g_pp", gpp_periodic(circuits, v)});
  }
}

namespace detail {

inline DistributionSpec read_distribution(const json& run, const std::string& where, std::string& model) {
  model = ju::text(run, "model", where);
  if (model == "exponential") return DistributionSpec::exponential();
  if (model == "log_gamma") return DistributionSpec::log_gamma(ju::number(run, "rho", where));
  if (model == "gamma") return DistributionSpec::gamma(ju::number(run, "rho", where));
  if (model == "bernoulli") return DistributionSpec::bernoulli(ju::number(run, "p", where));
  if (model == "normal_truncated")
    return DistributionSpec::normal_truncated(ju::number(run, "lo", where), ju::number(run, "hi", where));
  throw ConfigError(where + ".model: unknown model '" + model + "'");
}

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

// Closed-form value for a run, NaN when none exists.
struct Oracles {
  std::string model;
  DistributionSpec dist;
  double beta;

  double gpp(double s) const {
    if (model == "exponential" && beta == kInfiniteBeta) return rost_gpp(s);
    if (model == "log_gamma" && beta == 1.0 && s > 0.0 && s < 1.0) return loggamma_gpp(LogGammaModel{dist.shape}, s);
    if (model == "bernoulli" && dist.p == 1.0 && beta == kInfiniteBeta) return 1.0;
    return nan();
  }
  double gpl(const Tilt& h) const {
    if (model == "exponential" && beta == kInfiniteBeta) return rost_gpl(h);
    if (model == "log_gamma" && beta == 1.0) return loggamma_gpl(LogGammaModel{dist.shape}, h);
    if (model == "bernoulli" && dist.p == 1.0) {
      if (beta == kInfiniteBeta) return 1.0 + std::max(h.h[0], h.h[1]);
      return annealed_formulas(dist, beta, h, StepSet::unit_steps(2)).g_weak;
    }
    return nan();
  }
  // Mean gradient B(x, x + z) toward direction (s, 1 - s).
  double busemann_pp(double s, std::size_t k) const {
    if (!(s > 0.0 && s < 1.0)) return nan();
    if (model == "exponential" && beta == kInfiniteBeta) {
      const double a = exp_alpha(s);
      return k == 0 ? 1.0 / a : 1.0 / (1.0 - a);
    }
    if (model == "log_gamma" && beta == 1.0) {
      const LogGammaModel m{dist.shape};
      const double t = loggamma_theta(m, s);
      return k == 0 ? -digamma(t) : -digamma(m.rho - t);
    }
    return nan();
  }
};

}  // namespace detail

/// mc: Monte-Carlo estimates with oracle comparison.
/// CSV header: model,quantity,beta,h_or_xi,n,replicas,seed,estimate,stderr,oracle,abs_err
inline void cmd_mc(const json& cfg, std::ostream& out, std::ostream& log, const Overrides& ov) {
  const std::string where = "config";
  ju::check_keys(cfg, {"seed", "runs"}, where);
  std::uint64_t base_seed = cfg.contains("seed") ? detail::read_seed(cfg["seed"], where + ".seed") : 1;
  const auto& runs = ju::field(cfg, "runs", where);
  if (!runs.is_array() || runs.empty()) throw ConfigError(where + ".runs: expected a nonempty array");
  CsvWriter csv(out, {"model", "quantity", "beta", "h_or_xi", "n", "replicas", "seed", "estimate", "stderr",
                      "oracle", "abs_err"});
  const auto steps = StepSet::unit_steps(2);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& run = runs[i];
    const std::string rw = where + ".runs[" + std::to_string(i) + "]";
    ju::check_keys(run, {"model", "rho", "p", "lo", "hi", "beta", "quantity", "xi", "h", "n", "replicas", "seed", "level"}, rw);
    detail::Oracles orc;
    orc.dist = detail::read_distribution(run, rw, orc.model);
    try {
      orc.dist.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(rw + ": " + e.what());
    }
    orc.beta = detail::read_beta(ju::field(run, "beta", rw), rw + ".beta");
    const std::string quantity = ju::text(run, "quantity", rw);
    const auto n = static_cast<std::int64_t>(detail::read_count(run, "n", rw, 1));
    McOptions opt;
    opt.replicas = run.contains("replicas") ? detail::read_count(run, "replicas", rw, 1) : 20;
    opt.seed = ov.seed ? *ov.seed : run.contains("seed") ? detail::read_seed(run["seed"], rw + ".seed") : base_seed;
    opt.threads = ov.threads;
    const auto level = run.contains("level") ? static_cast<std::int64_t>(detail::read_count(run, "level", rw, 0)) : 200;
    const std::string beta_text = orc.beta == kInfiniteBeta ? "inf" : format_double(orc.beta);

    auto emit = [&](const std::string& qty, const std::string& arg, const Estimate& e, double oracle) {
      csv.row({orc.model, qty, beta_text, arg, static_cast<long long>(n),
               static_cast<unsigned long long>(opt.replicas), static_cast<unsigned long long>(opt.seed), e.mean,
               e.stderr_, oracle, std::isnan(oracle) ? detail::nan() : std::abs(e.mean - oracle)});
      log << orc.model << " " << qty << " " << arg << ": " << format_double(e.mean) << " +- "
          << format_double(e.stderr_) << "\n";
    };

    if (quantity == "gpp" || quantity == "busemann_pp") {
      const auto v = detail::read_velocity(ju::field(run, "xi", rw), steps, rw + ".xi");
      const auto arg = format_vector(v.xi);
      if (quantity == "gpp") {
        emit("gpp", arg, estimate_gpp(orc.dist, orc.beta, v, n, opt), orc.gpp(v.xi[0]));
      } else {
        static const char* names[3][2] = {{"busemann_pp_e1_dz0", "busemann_pp_e2_dz0"},
                                          {"busemann_pp_e1_dze1", "busemann_pp_e2_dze1"},
                                          {"busemann_pp_e1_dze2", "busemann_pp_e2_dze2"}};
        for (std::size_t k = 0; k < 2; ++k) {
          const auto rep = estimate_busemann_pp(orc.dist, orc.beta, v, staircase_pairs(level, steps[k]), n, opt);
          for (std::size_t p = 0; p < rep.pooled.size(); ++p)
            emit(names[p][k], arg, rep.pooled[p], orc.busemann_pp(v.xi[0], k));
        }
      }
    } else if (quantity == "gpl" || quantity == "busemann_pl") {
      const auto h = detail::read_tilt(ju::field(run, "h", rw), 2, rw + ".h");
      const auto arg = format_vector(h.h);
      if (quantity == "gpl") {
        emit("gpl", arg, estimate_gpl(orc.dist, orc.beta, h, n, opt), orc.gpl(h));
      } else {
        const auto rep = estimate_busemann_pl(orc.dist, orc.beta, h, n, level, opt);
        if (rep.bound_violations > 0)
          throw ModelError("point-to-level gradient fell below its lower bound " +
                           std::to_string(rep.bound_violations) + " times");
        emit("busemann_pl_e1", arg, rep.per_step[0], orc.gpl(h));
        emit("busemann_pl_e2", arg, rep.per_step[1], orc.gpl(h));
      }
    } else {
      throw ConfigError(rw + ".quantity: unknown quantity '" + quantity + "'");
    }
  }
}

namespace detail {

inline std::vector<double> read_s_values(const json& cfg, const std::string& where, bool closed) {
  std::vector<double> s;
  if (cfg.contains("s")) {
    s = ju::numbers(cfg["s"], where + ".s");
  } else if (cfg.contains("s_grid")) {
    const auto& g = cfg["s_grid"];
    const std::string gw = where + ".s_grid";
    ju::check_keys(g, {"from", "to", "points"}, gw);
    const double lo = ju::number(g, "from", gw), hi = ju::number(g, "to", gw);
    const auto pts = read_count(g, "points", gw, 1);
    for (std::size_t i = 0; i < pts; ++i)
      s.push_back(pts == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(pts - 1));
  } else {
    throw ConfigError(where + ": one of 's' or 's_grid' is required");
  }
  for (double x : s)
    if (closed ? !(x >= 0.0 && x <= 1.0) : !(x > 0.0 && x < 1.0))
      throw ConfigError(where + ": s = " + format_double(x) + " outside " + (closed ? "[0,1]" : "(0,1)"));
  return s;
}

inline double read_rho(const json& cfg, const std::string& where) {
  const double rho = ju::number(cfg, "rho", where);
  if (!(rho > 0.0)) throw ConfigError(where + ".rho: must be positive");
  return rho;
}

}  // namespace detail

/// oracle: closed-form curves. CSV header: s,g_pp,theta_or_alpha,h1,h2
inline void cmd_oracle(const json& cfg, std::ostream& out, std::ostream& log, const Overrides&) {
  const std::string where = "config";
  ju::check_keys(cfg, {"model", "rho", "s", "s_grid"}, where);
  const std::string model = ju::text(cfg, "model", where);
  CsvWriter csv(out, {"s", "g_pp", "theta_or_alpha", "h1", "h2"});
  if (model == "rost") {
    if (cfg.contains("rho")) throw ConfigError(where + ": unknown key 'rho' for model rost");
    for (double s : detail::read_s_values(cfg, where, true)) {
      const double a = std::sqrt(s) / (std::sqrt(s) + std::sqrt(1.0 - s));
      csv.row({s, rost_gpp(s), a, -1.0 / a, -1.0 / (1.0 - a)});
    }
  } else if (model == "log_gamma") {
    const LogGammaModel m{detail::read_rho(cfg, where)};
    for (double s : detail::read_s_values(cfg, where, false)) {
      const auto d = loggamma_duality(m, s);
      csv.row({s, d.g_pp, d.theta, d.h.h[0], d.h.h[1]});
    }
  } else {
    throw ConfigError(where + ".model: unknown model '" + model + "'");
  }
  log << "oracle " << model << " written\n";
}

/// duality: grid Legendre transforms checked against closed forms.
/// CSV header: direction,model,rho,input,value,argopt,closed_form,abs_err
inline void cmd_duality(const json& cfg, std::ostream& out, std::ostream& log, const Overrides&) {
  const std::string where = "config";
  ju::check_keys(cfg, {"direction", "model", "rho", "inputs", "grid_points", "h_box"}, where);
  const std::string direction = ju::text(cfg, "direction", where);
  const std::string model = ju::text(cfg, "model", where);
  const std::size_t points = cfg.contains("grid_points") ? detail::read_count(cfg, "grid_points", where, 200) : 4001;
  double rho = detail::nan();
  std::function<double(double)> gpp;
  std::function<double(const Tilt&)> gpl;
  std::function<double(double)> dual_h1;  // h1 - h2 dual to s
  double s_lo = 0.0, s_hi = 1.0;
  if (model == "rost") {
    if (cfg.contains("rho")) throw ConfigError(where + ": unknown key 'rho' for model rost");
    gpp = [](double s) { return rost_gpp(s); };
    gpl = [](const Tilt& h) { return rost_gpl(h); };
    dual_h1 = [](double s) { const auto h = exp_dual_tilt(s); return h.h[0] - h.h[1]; };
  } else if (model == "log_gamma") {
    rho = detail::read_rho(cfg, where);
    const LogGammaModel m{rho};
    gpp = [m](double s) { return loggamma_gpp(m, s); };
    gpl = [m](const Tilt& h) { return loggamma_gpl(m, h); };
    dual_h1 = [m](double s) { return loggamma_duality(m, s).h.h[0]; };
    // g_pp is only defined inside (0, 1); keep the grid off the endpoints.
    s_lo = 1e-4;
    s_hi = 1.0 - 1e-4;
  } else {
    throw ConfigError(where + ".model: unknown model '" + model + "'");
  }
  const auto& inputs = ju::field(cfg, "inputs", where);
  if (!inputs.is_array() || inputs.empty()) throw ConfigError(where + ".inputs: expected a nonempty array");
  CsvWriter csv(out, {"direction", "model", "rho", "input", "value", "argopt", "closed_form", "abs_err"});

  if (direction == "pl_from_pp") {
    if (cfg.contains("h_box")) throw ConfigError(where + ": 'h_box' applies only to pp_from_pl");
    const auto curve = FreeEnergyCurve::sample(s_lo, s_hi, points, gpp);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const auto h = detail::read_tilt(inputs[i], 2, where + ".inputs[" + std::to_string(i) + "]");
      const auto r = legendre_pl_from_pp(curve, h);
      const double exact = gpl(h);
      csv.row({direction, model, rho, format_vector(h.h), r.value, r.argopt, exact, std::abs(r.value - exact)});
    }
  } else if (direction == "pp_from_pl") {
    std::vector<double> svals;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const double s = ju::number(inputs[i], where + ".inputs[" + std::to_string(i) + "]");
      if (!(s > 0.0 && s < 1.0)) throw ConfigError(where + ".inputs: s must lie in (0,1)");
      svals.push_back(s);
    }
    double lo, hi;
    if (cfg.contains("h_box")) {
      const auto box = ju::numbers(cfg["h_box"], where + ".h_box");
      if (box.size() != 2 || !(box[0] < box[1])) throw ConfigError(where + ".h_box: expected [lo, hi] with lo < hi");
      lo = box[0];
      hi = box[1];
    } else {
      double reach = 1.0;
      for (double s : svals) reach = std::max(reach, std::abs(dual_h1(s)) + 1.0);
      lo = -2.0 * reach;
      hi = 2.0 * reach;
    }
    const auto curve = FreeEnergyCurve::sample(lo, hi, points, [&](double h1) { return gpl(Tilt{{h1, 0.0}}); });
    for (double s : svals) {
      const auto r = legendre_pp_from_pl(curve, s);
      const double exact = gpp(s);
      csv.row({direction, model, rho, s, r.value, r.argopt, exact, std::abs(r.value - exact)});
    }
  } else {
    throw ConfigError(where + ".direction: expected 'pl_from_pp' or 'pp_from_pl'");
  }
  log << "duality " << direction << " " << model << " written\n";
}

/// Parses the config file and runs one subcommand; returns the exit code
/// (0 ok, 2 model error, 3 config error, 4 resource cap, 1 anything else).
inline int run_command(const std::string& name, const std::string& config_path, std::ostream& out,
                       std::ostream& log, const Overrides& ov) {
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
    json cfg;
    try {
      cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    if (name == "periodic")
      cmd_periodic(cfg, out, log, ov);
    else if (name == "mc")
      cmd_mc(cfg, out, log, ov);
    else if (name == "oracle")
      cmd_oracle(cfg, out, log, ov);
    else if (name == "duality")
      cmd_duality(cfg, out, log, ov);
    else
      throw ConfigError("unknown subcommand '" + name + "'");
    return 0;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    return 3;
  } catch (const json::exception& e) {
    log << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace polyvar::cli
