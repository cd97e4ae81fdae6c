#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "polyvar/maxplus_solver.hpp"
#include "polyvar/pf_solver.hpp"
#include "test_support.hpp"

using namespace polyvar;
using namespace polyvar::testing;

namespace {

const double kE = std::exp(1.0);

QuotientSpace single_state(double c) {
  return QuotientSpace::from_table(StepSet::unit_steps(2), {{0, 0}}, {c});
}

}  // namespace

TEST(TransferMatrix, StripesEntries) {
  const auto a = build_transfer_matrix(stripes(), Tilt{{0, 0}}, 1.0);
  EXPECT_NEAR(a.at(0, 0), kE / 2, 1e-15);
  EXPECT_NEAR(a.at(0, 1), kE / 2, 1e-15);
  EXPECT_NEAR(a.at(1, 0), 0.5, 1e-15);
  EXPECT_NEAR(a.at(1, 1), 0.5, 1e-15);
}

TEST(TransferMatrix, StripesWithTiltMatchesMaxPlusPattern) {
  const double h1 = 0.3, h2 = -0.4;
  const auto a = build_transfer_matrix(stripes(), Tilt{{h1, h2}}, 1.0);
  EXPECT_NEAR(a.at(0, 0), std::exp(1 + h2) / 2, 1e-15);
  EXPECT_NEAR(a.at(0, 1), std::exp(1 + h1) / 2, 1e-15);
  EXPECT_NEAR(a.at(1, 0), std::exp(h1) / 2, 1e-15);
  EXPECT_NEAR(a.at(1, 1), std::exp(h2) / 2, 1e-15);
}

TEST(TransferMatrix, SingleStateCollapsesLoops) {
  const auto a = build_transfer_matrix(single_state(0.4), Tilt{{0, 0}}, 1.0);
  ASSERT_EQ(a.size, 1u);
  EXPECT_NEAR(a.at(0, 0), std::exp(0.4), 1e-15);
}

TEST(TransferMatrix, OverflowGuard) {
  EXPECT_THROW(build_transfer_matrix(stripes(), Tilt{{0, 0}}, 800.0), OverflowGuard);
  EXPECT_NO_THROW(build_log_transfer_matrix(stripes(), Tilt{{0, 0}}, 800.0));
  EXPECT_THROW(build_transfer_matrix(stripes(), Tilt{{0, 0}}, 0.0), std::invalid_argument);
}

TEST(SolvePF, SingleState) {
  const auto s = solve_pf(build_transfer_matrix(single_state(0.4), Tilt{{0, 0}}, 1.0));
  EXPECT_NEAR(s.rho, std::exp(0.4), 1e-14);
  EXPECT_NEAR(s.g_pl, 0.4, 1e-14);
}

TEST(SolvePF, StripesQuadraticRoot) {
  // 2x2 characteristic polynomial: rho = (tr + sqrt(tr^2 - 4 det)) / 2.
  const double a = kE / 2, b = kE / 2, c = 0.5, d = 0.5;
  const double tr = a + d, det = a * d - b * c;
  const double rho = 0.5 * (tr + std::sqrt(tr * tr - 4 * det));
  const auto s = solve_pf(build_transfer_matrix(stripes(), Tilt{{0, 0}}, 1.0));
  EXPECT_NEAR(s.rho, rho, 1e-13);
  EXPECT_NEAR(s.rho, (kE + 1) / 2, 1e-13);
}

TEST(SolvePF, NormalizationAndResiduals) {
  std::mt19937_64 g(3);
  for (int t = 0; t < 50; ++t) {
    const auto q = random_quotient(g);
    const auto h = random_tilt(g);
    const double beta = std::uniform_real_distribution<double>(0.5, 8.0)(g);
    const auto s = solve_pf(build_log_transfer_matrix(q, h, beta));
    double lr = 0.0, r = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      lr += s.lev[i] * s.rev[i];
      r += s.rev[i];
      EXPECT_GT(s.lev[i], 0.0);
      EXPECT_GT(s.rev[i], 0.0);
    }
    EXPECT_NEAR(lr, 1.0, 1e-10);
    EXPECT_NEAR(r, static_cast<double>(q.size()), 1e-10);
    EXPECT_LE(s.residual, 1e-9);
    EXPECT_NEAR(s.rho, dense_spectral_radius(dense_transfer(q, h, beta)), 1e-9 * s.rho);
  }
}

TEST(SolvePF, PeriodicPatternStillConverges) {
  // Pure 3-cycle: positivity pattern with period 3.
  const auto q = QuotientSpace::from_table(StepSet(std::vector<Site>{{1}}), {{1}, {2}, {0}}, {0.0, 1.0, 2.0});
  const auto s = solve_pf(build_transfer_matrix(q, Tilt{{0.0}}, 1.0));
  EXPECT_NEAR(s.g_pl, 1.0, 1e-12);
}

TEST(SolvePF, LargeBetaApproachesMaxPlus) {
  const auto s = solve_pf(build_log_transfer_matrix(stripes(), Tilt{{0, 0}}, 1e4));
  EXPECT_LE(s.g_pl, 1.0 + 1e-12);
  EXPECT_GE(s.g_pl, 1.0 - std::log(2.0) / 1e4);
}

TEST(CollatzWielandt, Sandwich) {
  std::mt19937_64 g(5);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 30; ++t) {
    const auto q = random_quotient(g);
    const auto a = build_log_transfer_matrix(q, random_tilt(g), 2.0);
    const auto s = solve_pf(a);
    for (int k = 0; k < 10; ++k) {
      std::vector<double> phi(q.size());
      for (double& x : phi) x = nd(g);
      const auto [lo, hi] = collatz_wielandt_log(a, phi);
      EXPECT_LE(lo, s.log_rho + 1e-12);
      EXPECT_GE(hi, s.log_rho - 1e-12);
    }
    const auto [lo, hi] = collatz_wielandt_log(a, s.log_rev);
    EXPECT_NEAR(lo, s.log_rho, 1e-9);
    EXPECT_NEAR(hi, s.log_rho, 1e-9);
  }
}

TEST(Corrector, SingleStateIsZero) {
  const auto q = single_state(0.25);
  const Tilt h{{0.3, -0.1}};
  const auto s = solve_pf(build_transfer_matrix(q, h, 1.0));
  const auto f = corrector_from_rev(s);
  EXPECT_NEAR(f.f[0], 0.0, 1e-14);
  EXPECT_NEAR(s.g_pl, std::log(0.5 * (std::exp(0.25 + 0.3) + std::exp(0.25 - 0.1))), 1e-14);
}

TEST(Corrector, BracketConstantOnStripes) {
  const auto q = stripes();
  const Tilt h{{0, 0}};
  const auto s = solve_pf(build_transfer_matrix(q, h, 1.0));
  const auto b = cocycle_brackets(q, h, 1.0, corrector_from_rev(s));
  EXPECT_NEAR(b[0], s.g_pl, 1e-12);
  EXPECT_NEAR(b[1], s.g_pl, 1e-12);
}

TEST(Corrector, RescalingRevShiftsOnlyByConstant) {
  const auto q = stripes();
  const Tilt h{{0.2, 0.1}};
  auto s = solve_pf(build_transfer_matrix(q, h, 1.5));
  const auto f1 = corrector_from_rev(s);
  for (double& v : s.log_rev) v += 3.0;
  const auto f2 = corrector_from_rev(s);
  for (std::size_t w = 0; w < q.size(); ++w)
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(f1.increment(q, w, k), f2.increment(q, w, k), 1e-14);
}

TEST(CocycleFormula, ZeroPotentialOnStripes) {
  const auto q = stripes();
  const double v = evaluate_cocycle_formula(q, Tilt{{0, 0}}, 1.0, GradientCocycle{{0.0, 0.0}});
  EXPECT_NEAR(v, 1.0, 1e-15);
  EXPECT_GE(v, solve_pf(build_transfer_matrix(q, Tilt{{0, 0}}, 1.0)).g_pl);
}

TEST(CocycleFormula, RandomGradientsNeverBeatGpl) {
  std::mt19937_64 g(8);
  std::normal_distribution<double> nd(0.0, 2.0);
  for (int t = 0; t < 30; ++t) {
    const auto q = random_quotient(g);
    const auto h = random_tilt(g);
    const double beta = 1.7;
    const auto s = solve_pf(build_log_transfer_matrix(q, h, beta));
    for (int k = 0; k < 20; ++k) {
      GradientCocycle f;
      for (std::size_t w = 0; w < q.size(); ++w) f.f.push_back(nd(g));
      EXPECT_GE(evaluate_cocycle_formula(q, h, beta, f), s.g_pl - 1e-12);
    }
  }
}

TEST(Entropy, SingleStateEqualTilts) {
  const auto q = single_state(0.5);
  const auto s = solve_pf(build_transfer_matrix(q, Tilt{{0.2, 0.2}}, 1.0));
  const auto e = invariant_measure_and_entropy(q, s);
  EXPECT_NEAR(e.mu0[0], 1.0, 1e-14);
  EXPECT_NEAR(e.entropy, 0.0, 1e-14);
  EXPECT_NEAR(e.step_kernel[0][0], 0.5, 1e-14);
  EXPECT_LE(e.identity_gap, 1e-14);
}

TEST(Entropy, StripesIdentity) {
  const auto q = stripes();
  for (const auto& h : {Tilt{{0, 0}}, Tilt{{0, 10}}}) {
    const auto s = solve_pf(build_transfer_matrix(q, h, 1.0));
    const auto e = invariant_measure_and_entropy(q, s);
    EXPECT_LE(e.identity_gap, 1e-9);
    EXPECT_LE(e.stationarity_error, 1e-10);
    EXPECT_GE(e.entropy, -1e-15);
    EXPECT_LE(e.entropy, std::log(2.0) + 1e-15);
  }
  const auto s = solve_pf(build_transfer_matrix(q, Tilt{{0, 10}}, 1.0));
  const auto e = invariant_measure_and_entropy(q, s);
  // Strong tilt towards e2: state 0 carries the mass and its kernel sits on e2,
  // so each step flips the state and the entropy is near log 2.
  EXPECT_GT(e.mu0[0], 0.999);
  EXPECT_GT(e.step_kernel[0][1], 0.999);
  EXPECT_GT(e.entropy, std::log(2.0) - 1e-3);
}

TEST(Entropy, RandomQuotients) {
  std::mt19937_64 g(21);
  for (int t = 0; t < 50; ++t) {
    const auto q = random_quotient(g);
    const auto h = random_tilt(g);
    const double beta = std::uniform_real_distribution<double>(0.5, 8.0)(g);
    const auto s = solve_pf(build_log_transfer_matrix(q, h, beta));
    const auto e = invariant_measure_and_entropy(q, s);
    EXPECT_LE(e.identity_gap, 1e-9);
    EXPECT_LE(e.stationarity_error, 1e-10);
    EXPECT_LE(e.kernel_row_error, 1e-10);
    EXPECT_GE(e.entropy, -1e-12);
    EXPECT_LE(e.entropy, std::log(2.0) + 1e-12);
  }
}

TEST(BusemannPF, SingleState) {
  const auto b = busemann_pf(single_state(0.1), Tilt{{0.0, 0.0}}, 1.0, 20);
  EXPECT_NEAR(b.limit[0][0], b.solution.g_pl, 1e-14);
  EXPECT_NEAR(b.limit[0][1], b.solution.g_pl, 1e-14);
}

TEST(BusemannPF, StripesTraceConverges) {
  const auto b = busemann_pf(stripes(), Tilt{{0, 0}}, 1.0, 200);
  EXPECT_LE(b.max_deviation, 1e-8);
  EXPECT_LE(b.recovery_residual, 1e-8);
}

TEST(BusemannPF, RejectsPeriodicPattern) {
  const auto q = QuotientSpace::from_table(StepSet(std::vector<Site>{{1}}), {{1}, {0}}, {0.0, 1.0});
  EXPECT_THROW(busemann_pf(q, Tilt{{0.0}}, 1.0), NotPrimitive);
}

TEST(BusemannPF, CenteredIncrementsAndConstantTiltPart) {
  // E_P[B(0,z)] - g_pl has zero mean over Omega after removing the corrector:
  // B(w,0,z) = g_pl - F(w,0,z), and F is a gradient so it averages to 0.
  std::mt19937_64 g(4);
  for (int t = 0; t < 20; ++t) {
    const auto q = random_quotient(g);
    const auto h = random_tilt(g);
    if (transfer_period(q) != 1) continue;
    const auto b = busemann_pf(q, h, 1.3, 400);
    for (std::size_t k = 0; k < q.steps().size(); ++k) {
      double mean = 0.0;
      for (std::size_t w = 0; w < q.size(); ++w) mean += b.limit[w][k];
      mean /= static_cast<double>(q.size());
      EXPECT_NEAR(mean, b.solution.g_pl, 1e-10);
    }
    EXPECT_LE(b.recovery_residual, 1e-8);
  }
}

TEST(BetaBridge, SandwichAgainstMaxPlus) {
  std::mt19937_64 g(12);
  for (int t = 0; t < 10; ++t) {
    const auto q = random_quotient(g);
    const auto h = random_tilt(g);
    const double lam = karp_eigenvalue(build_maxplus_matrix(q, h));
    for (double beta = 1; beta <= 64; beta *= 2) {
      const double gb = solve_pf(build_log_transfer_matrix(q, h, beta)).g_pl;
      EXPECT_LE(gb, lam + 1e-12);
      EXPECT_GE(gb, lam - std::log(2.0) / beta - 1e-12);
    }
  }
}
