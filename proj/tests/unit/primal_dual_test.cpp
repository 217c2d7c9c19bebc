#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mdual/errors.hpp"
#include "mdual/primal_dual.hpp"
#include "support.hpp"

namespace mdual {
namespace {

using test::fixture_problem;
using test::vec;

Problem line_problem(ConvexIntegrand f, int cells, const Vector& u0,
                     OperatorKind kind = OperatorKind::gradient_1d) {
  const Grid g = Grid::line(cells);
  auto a = kind == OperatorKind::custom ? ConstraintOperator::mass(g)
                                        : ConstraintOperator::build(kind, g);
  const Vector tau = a.apply(u0);
  return Problem(std::move(f), std::move(a), SourceTerm{tau, u0});
}

Problem mass_problem(ConvexIntegrand f, const Vector& u0) {
  return line_problem(std::move(f), static_cast<int>(u0.size()), u0, OperatorKind::custom);
}

TEST(PrimalEnergy, Examples) {
  EXPECT_NEAR(primal_energy(line_problem(ConvexIntegrand::area(), 4, Vector::Zero(4)), Vector::Zero(4)),
              1.0, 1e-15);
  const auto abs1 = mass_problem(ConvexIntegrand::abs(), Vector::Ones(4));
  EXPECT_NEAR(primal_energy(abs1, Vector::Ones(4)), 1.0, 1e-15);
  const auto two = mass_problem(ConvexIntegrand::area(), vec({0.0, 1.0}));
  EXPECT_NEAR(primal_energy(two, vec({0.0, 1.0})), 0.5 + 0.5 * std::sqrt(2.0), 1e-15);
}

TEST(Problem, RejectsInconsistentSource) {
  const Grid g = Grid::line(4);
  auto a = ConstraintOperator::build(OperatorKind::gradient_1d, g);
  EXPECT_THROW(Problem(ConvexIntegrand::area(), a, SourceTerm{Vector::Ones(4), Vector::Zero(4)}),
               DomainError);
  EXPECT_THROW(Problem(ConvexIntegrand::area(), a, SourceTerm{Vector::Zero(3), Vector::Zero(4)}),
               DimensionMismatch);
  EXPECT_THROW(Problem(ConvexIntegrand::area(2), a, SourceTerm{Vector::Zero(4), Vector::Zero(4)}),
               DimensionMismatch);
}

TEST(RelaxedEnergy, AtomFreeMatchesPrimal) {
  const Problem p = fixture_problem("area_1d_16");
  const Vector u = p.point(vec({0.3}));
  EXPECT_EQ(relaxed_energy(p, p.as_measure(u)), primal_energy(p, u));
}

TEST(RelaxedEnergy, AtomAddsItsMass) {
  const Problem p = mass_problem(ConvexIntegrand::area(), Vector::Ones(8));
  const double m = 0.4;
  const DiscreteMeasure mu(p.grid(), 1, Vector::Constant(8, 1.0 - m), {Atom{3, vec({m})}});
  EXPECT_NEAR(relaxed_energy(p, mu), std::sqrt(1.0 + (1.0 - m) * (1.0 - m)) + m, 1e-12);
}

TEST(RelaxedEnergy, InfeasibleMeasureThrows) {
  const Problem p = fixture_problem("area_1d_16");
  DiscreteMeasure mu(p.grid(), 1, p.u0(), {Atom{2, vec({1.0})}});
  EXPECT_THROW(relaxed_energy(p, mu), Infeasible);
}

TEST(RelaxedEnergy, ZeroMeasureWithZeroData) {
  const Problem p = fixture_problem("area_tau0_4");
  EXPECT_NEAR(relaxed_energy(p, DiscreteMeasure(p.grid(), 1)), 1.0, 1e-15);
}

TEST(DualEnergy, Examples) {
  const Problem p = fixture_problem("area_tau0_4");
  EXPECT_NEAR(dual_energy(p, Vector::Zero(4)).value(), p.volume(), 1e-15);
  // A* w* = (w_{i-1} - w_i)/h reaches 8 in magnitude.
  EXPECT_TRUE(dual_energy(p, vec({1.0, 0.0, 0.0, 0.0})).is_minus_infinity());
  const Problem q = line_problem(ConvexIntegrand::abs(), 4, Vector::Zero(4));
  EXPECT_EQ(dual_energy(q, Vector::Zero(4)).value(), 0.0);
}

TEST(Lagrangian, FeasibleEqualsPrimal) {
  const Problem p = fixture_problem("area_1d_16");
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  Vector w(16);
  for (auto& v : w) v = n(rng);
  const Vector u = p.point(vec({-0.2}));
  EXPECT_NEAR(lagrangian(p, u, w), primal_energy(p, u), 1e-12);
  const Problem z = fixture_problem("area_tau0_4");
  EXPECT_NEAR(lagrangian(z, Vector::Zero(4), Vector::Zero(4)), primal_energy(z, Vector::Zero(4)), 0);
}

// Two cells, area: inf_u L(u, w*) by independent per-cell scans equals R(w*).
TEST(Lagrangian, InfOverUIsDualEnergy) {
  const Problem p = line_problem(ConvexIntegrand::area(), 2, vec({0.3, -0.5}));
  const Vector w = vec({0.12, -0.05});
  double inf_l = 0.0;
  const Vector q = p.op().adjoint(w);
  for (int c = 0; c < 2; ++c) {
    double best = INFINITY;
    for (int i = 0; i <= 200000; ++i) {
      const double z = -50.0 + 100.0 * i / 200000;
      best = std::min(best, std::sqrt(1 + z * z) - q[c] * z);
    }
    inf_l += best * p.dx();
  }
  inf_l += p.dx() * w.dot(p.tau());
  EXPECT_NEAR(inf_l, dual_energy(p, w).value(), 1e-8);
}

TEST(Lagrangian, ScanOverDualStaysBelowPrimal) {
  const Problem p = line_problem(ConvexIntegrand::area(), 2, vec({0.3, -0.5}));
  const Vector u = p.u0();
  const double f = primal_energy(p, u);
  double best = -INFINITY;
  for (int i = -50; i <= 50; ++i) {
    for (int j = -50; j <= 50; ++j) {
      const Vector w = vec({0.01 * i, 0.01 * j});
      const ExtendedReal r = dual_energy(p, w);
      best = std::max(best, r.value());
      EXPECT_LE(lagrangian(p, u, w), f + 1e-9);
    }
  }
  EXPECT_LE(best, f + 1e-9);
}

TEST(Lagrangian, BracketsOnRandomFeasiblePoints) {
  const Problem p = fixture_problem("area_1d_16");
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 0.01);
  for (int t = 0; t < 20; ++t) {
    Vector w(16);
    for (auto& v : w) v = n(rng);
    const ExtendedReal r = dual_energy(p, w);
    const Vector u = p.point(vec({n(rng) * 50}));
    const double l = lagrangian(p, u, w);
    EXPECT_LE(r.value(), l + 1e-12);
    EXPECT_LE(l, primal_energy(p, u) + 1e-12);
  }
}

TEST(SolveDual, TauZeroArea) {
  const Problem p = fixture_problem("area_tau0_4");
  const DualCertificate c = solve_dual(p);
  EXPECT_NEAR(c.r_value.value(), p.volume(), 1e-9);
  EXPECT_TRUE(c.astar_wstar.isApprox(p.op().adjoint(c.wstar)) || c.astar_wstar.norm() == 0.0);
}

TEST(SolveDual, TauZeroAbs) {
  const Problem p = line_problem(ConvexIntegrand::abs(), 4, Vector::Zero(4));
  EXPECT_NEAR(solve_dual(p).r_value.value(), 0.0, 1e-12);
}

TEST(SolveDual, MatchesBruteForceOnFourCells) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 0.5);
  Vector u0(4);
  for (auto& v : u0) v = n(rng);
  const Problem p = line_problem(ConvexIntegrand::area(), 4, u0);
  const DualCertificate c = solve_dual(p);
  const OracleResult o = brute_force_dual(p);
  EXPECT_NEAR(c.r_value.value(), o.value, 1e-2);
  EXPECT_LE(c.r_value.value(), o.value + 1e-3);
  EXPECT_LE(c.astar_wstar.cwiseAbs().maxCoeff(), p.f().growth_constant() + 1e-9);
}

TEST(SolvePrimal, TauZeroAreaGivesZero) {
  const Problem p = fixture_problem("area_tau0_4");
  const DiscreteMeasure mu = solve_primal(p);
  EXPECT_TRUE(mu.atom_free());
  EXPECT_LT(mu.density().cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(relaxed_energy(p, mu), p.volume(), 1e-9);
}

TEST(SolvePrimal, WeightedAbsMatchesOracle) {
  const Grid g = Grid::line(2);
  const SampledField w({2}, {1.0}, {1.0, 2.0});
  const Problem p(ConvexIntegrand::weighted_abs(w), ConstraintOperator::mass(g),
                  SourceTerm{vec({2.0}), vec({1.0, 1.0})});
  const double solved = relaxed_energy(p, solve_primal(p));
  EXPECT_NEAR(solved, brute_force_primal(p).value, 1e-2);
  EXPECT_NEAR(solved, 1.0, 1e-2);
}

TEST(SolvePrimal, StrictlyConvexRestartsAgree) {
  const Problem p = fixture_problem("area_1d_16");
  const OracleResult oracle = brute_force_primal(p);
  std::vector<Vector> minimizers;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    PrimalOptions opts;
    opts.seed = seed;
    const DiscreteMeasure mu = solve_primal(p, opts);
    EXPECT_NEAR(relaxed_energy(p, mu), oracle.value, 1e-2);
    minimizers.push_back(mu.density());
  }
  EXPECT_LT((minimizers[0] - minimizers[1]).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_LT((minimizers[0] - minimizers[2]).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(DualityGap, OptimalPairOnTauZero) {
  const Problem p = fixture_problem("area_tau0_4");
  const DiscreteMeasure zero(p.grid(), 1);
  const DualCertificate opt = make_certificate(p, Vector::Zero(4));
  EXPECT_LE(duality_gap(p, zero, opt), 1e-4);
  const DualCertificate off = make_certificate(p, vec({0.02, 0.0, 0.0, 0.0}));
  EXPECT_GT(duality_gap(p, zero, off), duality_gap(p, zero, opt));
}

TEST(DualityGap, WeakDualityOnRandomPairs) {
  const Problem p = fixture_problem("area_1d_16");
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 0.01);
  for (int t = 0; t < 30; ++t) {
    Vector w(16);
    for (auto& v : w) v = n(rng);
    const DualCertificate c = make_certificate(p, w);
    if (!c.r_value.is_finite()) continue;
    const DiscreteMeasure mu = p.as_measure(p.point(vec({10 * n(rng)})));
    EXPECT_GE(duality_gap(p, mu, c), -1e-9);
  }
  Vector far = Vector::Zero(16);
  far[0] = 5.0;
  const DualCertificate inf = make_certificate(p, far);
  EXPECT_TRUE(std::isinf(duality_gap(p, p.as_measure(p.u0()), inf)));
}

TEST(Solve, FixtureReportsSmallGap) {
  const Problem p = fixture_problem("area_1d_16");
  const SolveReport r = solve(p);
  EXPECT_LE(r.gap, 1e-3);
  EXPECT_GE(r.gap, -1e-9);
}

TEST(BruteForce, TwoCellAreaTauZero) {
  const Problem p = line_problem(ConvexIntegrand::area(), 2, Vector::Zero(2));
  EXPECT_NEAR(brute_force_primal(p).value, p.volume(), 1e-3);
  EXPECT_NEAR(brute_force_dual(p).value, p.volume(), 1e-3);
}

TEST(BruteForce, RefusesLargeProblems) {
  const Problem p = fixture_problem("mass_atom_128");
  EXPECT_THROW(brute_force_primal(p), TooLarge);
  EXPECT_THROW(brute_force_dual(fixture_problem("area_1d_16")), TooLarge);
}

TEST(BruteForce, LevelSetReductionHasTwoDimensions) {
  const Problem p = fixture_problem("area_1d_16");
  EXPECT_EQ(level_set_reduction(p).cols(), 2);
}

TEST(MollifiedFamily, SmallRadiusStaysClose) {
  for (const char* id : {"area_1d_16", "nogap_abs_N2", "nogap_huber_N2"}) {
    const Problem p = fixture_problem(id);
    const Problem pd = mollified_family(p, 1e-4);
    const double bound = pd.f().growth_constant() * 1e-4 * p.volume();
    for (double c : {-0.5, 0.0, 0.7}) {
      const Vector u = p.point(Vector::Constant(p.kernel().cols(), c));
      EXPECT_LE(std::abs(primal_energy(pd, u) - primal_energy(p, u)), bound + 1e-12) << id;
      EXPECT_GE(primal_energy(pd, u), primal_energy(p, u) - 1e-12) << id;
    }
  }
}

TEST(MollifiedFamily, OptimumShiftWithinBound) {
  const Problem p = fixture_problem("area_tau0_4");
  const double delta = 0.01;
  const Problem pd = mollified_family(p, delta);
  const double shift = std::abs(brute_force_primal(pd).value - brute_force_primal(p).value);
  EXPECT_LE(shift, p.f().growth_constant() * (1 + delta) * delta * p.volume() + 1e-6);
}

TEST(Ekeland, ExactMinimizerGivesOrthogonalCertificate) {
  const Problem p = fixture_problem("mollified_abs_4");
  const SolveReport r = solve(p);
  const EkelandResult e = ekeland_certificate(p, r.primal.density(), 1e-6, r.certificate.r_value.value());
  EXPECT_LE(e.report.kernel_pairing, 1e-3);
  EXPECT_TRUE(e.report.pass());
}

TEST(Ekeland, SymmetricZeroData) {
  const Problem p = line_problem(mollify(ConvexIntegrand::abs(), 0.01), 4, Vector::Zero(4));
  const EkelandResult e = ekeland_certificate(p, Vector::Zero(4), 1e-2);
  EXPECT_LT(e.vstar.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(e.report.pass());
}

TEST(Ekeland, ApproximateMinimizerFromDescent) {
  const Problem p = fixture_problem("mollified_abs_4");
  // u0 is not a minimizer, so the descent has work to do.
  ASSERT_GT(primal_energy(p, p.u0()), solve(p).relaxed_energy + 1e-3);
  PrimalOptions opts;
  opts.max_iter = 10;
  opts.polish_iter = 0;
  const Vector ubar = solve_primal(p, opts).density();
  const EkelandResult e = ekeland_certificate(p, ubar, 1e-2);
  EXPECT_TRUE(e.report.pass());
  EXPECT_LT(e.report.energy_uhat, e.report.energy_ubar + 2e-2);
  EXPECT_LE(e.report.l1_distance, 0.1 + 1e-12);
}

TEST(Ekeland, Preconditions) {
  EXPECT_THROW(ekeland_certificate(fixture_problem("area_1d_16").with_integrand(ConvexIntegrand::abs()),
                                   fixture_problem("area_1d_16").u0(), 1e-2),
               NotDifferentiable);
  const Problem p = fixture_problem("mollified_abs_4");
  EXPECT_THROW(ekeland_certificate(p, Vector::Zero(4), 1e-2), Infeasible);
}

}  // namespace
}  // namespace mdual
