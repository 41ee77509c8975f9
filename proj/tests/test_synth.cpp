#include <gtest/gtest.h>

#include <cmath>

#include "multiflow/synth.hpp"
#include "support.hpp"

using namespace multiflow;
using testing_support::central_difference;
using testing_support::commuting_system;
using testing_support::example1;
using testing_support::example2;
using testing_support::invariant_plane_system;
using testing_support::parse_family;
using testing_support::random_point;
using testing_support::random_vector;
using testing_support::Rng;

namespace {

const NumericConfig kCfg;

LinearSystem varying_diagonal() {
  return LinearSystem(
      parse_family(2, 2, {{"t1", "0", "0", "0"}, {"0", "0", "0", "0"}}, 2),
      parse_family(2, 1, {{"1", "0"}, {"0", "cos(t2)"}}, 2),
      DomainBox({-1.0, -1.0}, {2.0, 2.0}));
}

Vector e(long n, long i) { return Vector::Unit(n, i); }

}  // namespace

TEST(Candidate, ZeroCoefficientGivesZeroControl) {
  const auto sc = candidate_control(example2(), MultiTime::zeros(3), Vector::Zero(3), kCfg);
  EXPECT_TRUE(sc.valid);
  EXPECT_TRUE(sc.controls.is_constant());
  for (const auto& u : sc.controls.values(MultiTime{0.3, 0.2, 0.9})) {
    EXPECT_EQ(u.norm(), 0.0);
  }
}

TEST(Candidate, ExampleOneExponentialControl) {
  const auto sc = candidate_control(example1(), MultiTime{0.0, 0.0}, e(2, 0), kCfg);
  EXPECT_TRUE(sc.valid);
  EXPECT_FALSE(sc.controls.is_constant());
  for (double s1 : {0.0, 0.5, 1.3}) {
    const auto u = sc.controls.values(MultiTime{s1, 0.7});
    EXPECT_NEAR(u[0][0], std::exp(-s1), 1e-14);
    EXPECT_EQ(u[1][0], 0.0);
  }
}

TEST(Candidate, ExampleTwoIsNotAdmissible) {
  const auto sc = candidate_control(example2(), MultiTime::zeros(3), e(3, 0), kCfg);
  EXPECT_FALSE(sc.valid);
  EXPECT_FALSE(sc.gramian_check.pass);
  EXPECT_FALSE(check_control_compat(example2(), sc.controls, kCfg).pass);
  EXPECT_THROW(verify_transfer(example2(), sc, MultiTime::zeros(3), Vector::Zero(3),
                               MultiTime{1, 1, 1}, kCfg),
               GateError);
}

TEST(Candidate, ValidControlsAreCompatible) {
  Rng rng(17);
  for (int i = 0; i < 10; ++i) {
    const LinearSystem sys = i % 2 == 0 ? invariant_plane_system(rng, 2)
                                        : commuting_system(rng, 3, 3, 1, true);
    const auto sc = candidate_control(sys, random_point(rng, sys.m(), -1, 1),
                                      random_vector(rng, sys.n()), kCfg);
    ASSERT_TRUE(sc.valid);
    EXPECT_TRUE(check_control_compat(sys, sc.controls, kCfg).pass);
  }
  const LinearSystem sys = varying_diagonal();
  const auto sc = candidate_control(sys, MultiTime{0.0, 0.0},
                                    (Vector(2) << 0.4, -1.0).finished(), kCfg);
  ASSERT_TRUE(sc.valid);
  EXPECT_TRUE(check_control_compat(sys, sc.controls, kCfg).pass);
}

TEST(Candidate, PartialsMatchFiniteDifferences) {
  const LinearSystem sys = varying_diagonal();
  const auto sc = candidate_control(sys, MultiTime{0.2, -0.1},
                                    (Vector(2) << 1.5, 0.7).finished(), kCfg);
  const MultiTime s{0.8, 1.1};
  const auto partials = sc.controls.partials(s);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      const double fd = central_difference(
          [&](const std::vector<double>& x) {
            return sc.controls.values(MultiTime(x))[a][0];
          },
          {s[0], s[1]}, b);
      EXPECT_NEAR(partials[a * 2 + b][0], fd, 1e-6) << a << b;
    }
  }
}

TEST(Candidate, LinearInCoefficient) {
  Rng rng(3);
  const LinearSystem sys = invariant_plane_system(rng, 2);
  const MultiTime t0{0.1, 0.2}, s{0.9, -0.4};
  const Vector v1 = random_vector(rng, 4), v2 = random_vector(rng, 4);
  const auto u1 = candidate_control(sys, t0, v1, kCfg).controls.values(s);
  const auto u2 = candidate_control(sys, t0, v2, kCfg).controls.values(s);
  const auto u = candidate_control(sys, t0, 2.0 * v1 - v2, kCfg).controls.values(s);
  for (std::size_t a = 0; a < 2; ++a) {
    EXPECT_LT((u[a] - (2.0 * u1[a] - u2[a])).norm(), 1e-13);
  }
}

TEST(Synthesis, ExampleOneSteersToOrigin) {
  const MultiTime t0{0.0, 0.0}, t{1.0, 0.0};
  const Vector x0 = e(2, 0), y = Vector::Zero(2);
  const auto ts = synthesize_transfer(example1(), t0, x0, t, y, kCfg);
  EXPECT_TRUE(ts.feasible);
  EXPECT_NEAR(ts.control.v[0], -2.0 / (1.0 - std::exp(-2.0)), 1e-10);
  EXPECT_EQ(ts.control.v[1], 0.0);
  ASSERT_TRUE(ts.control.target.has_value());
  const auto check = verify_transfer(example1(), ts.control, t0, x0, t, kCfg);
  ASSERT_TRUE(check.error.has_value());
  EXPECT_LT(*check.error, 1e-9);
}

TEST(Synthesis, InfeasibleTargetIsFlagged) {
  const MultiTime t0{0.0, 0.0}, t{1.0, 0.0};
  const auto ts = synthesize_transfer(example1(), t0, e(2, 1), t, Vector::Zero(2), kCfg);
  EXPECT_FALSE(ts.feasible);
  EXPECT_NEAR(ts.residual, 1.0, 1e-14);
  EXPECT_EQ(ts.ordering, TimeOrdering::WeakForward);
  EXPECT_THROW(synthesize_transfer(example2(), MultiTime::zeros(3), e(3, 0),
                                   MultiTime{1, 1, 1}, Vector::Zero(3), kCfg),
               GateError);
}

TEST(Synthesis, FreeEvolutionNeedsNoControl) {
  const LinearSystem sys = example1();
  const MultiTime t0{0.0, 0.0}, t{1.0, 1.0};
  const Vector x0 = (Vector(2) << 0.3, -0.8).finished();
  const Vector y = Flow(sys, kCfg).chi(t, t0) * x0;
  const auto ts = synthesize_transfer(sys, t0, x0, t, y, kCfg);
  EXPECT_TRUE(ts.feasible);
  EXPECT_LT(ts.control.v.norm(), 1e-14);
}

TEST(Synthesis, PerturbedCoefficientMissesByFlowedGramian) {
  const LinearSystem sys = example1();
  const MultiTime t0{0.0, 0.0}, t{1.0, 1.0};
  const Vector x0 = (Vector(2) << 1.0, 2.0).finished();
  const Vector y = (Vector(2) << -0.5, 0.25).finished();
  auto ts = synthesize_transfer(sys, t0, x0, t, y, kCfg);
  const Vector delta = (Vector(2) << 0.01, -0.02).finished();
  const auto perturbed = candidate_control(sys, t0, ts.control.v + delta, kCfg);
  const Vector end = solve_controlled(sys, perturbed.controls, t0, x0, t, kCfg);
  const Vector want = Flow(sys, kCfg).chi(t, t0) * ts.gramian.value * delta;
  EXPECT_NEAR((end - y).norm(), want.norm(), 1e-9);
}

TEST(Synthesis, RandomRoundTrips) {
  Rng rng(44);
  for (int i = 0; i < 20; ++i) {
    const std::size_t m = 1 + static_cast<std::size_t>(i % 3);
    const LinearSystem sys = i % 2 == 0 ? commuting_system(rng, m, 3, 1, true)
                                        : invariant_plane_system(rng, m);
    const MultiTime t0 = random_point(rng, m, -0.5, 0.0);
    const MultiTime t = random_point(rng, m, 0.6, 1.2);
    const Vector x0 = random_vector(rng, sys.n());
    Vector y = random_vector(rng, sys.n());
    if (i % 2 == 1) {
      // Reachable targets only: x0 flowed plus a plane component.
      y = Flow(sys, kCfg).chi(t, t0) *
          (x0 + sys.N().constant_value(0) * random_vector(rng, 2));
    }
    const auto ts = synthesize_transfer(sys, t0, x0, t, y, kCfg);
    const auto d = decide_transfer(sys, t0, x0, t, y, kCfg);
    EXPECT_EQ(ts.feasible, d.feasible) << i;
    if (!ts.feasible) continue;
    const auto check = verify_transfer(sys, ts.control, t0, x0, t, kCfg);
    EXPECT_LT(*check.error, 1e-8 * (1.0 + y.norm())) << i;
    // The endpoint does not depend on the curve taken.
    const Vector stair = solve_controlled(sys, ts.control.controls, t0, x0, t, kCfg,
                                          PolylineCurve::staircase(t0, t));
    EXPECT_LT((stair - y).norm(), 1e-8 * (1.0 + y.norm())) << i;
  }
}

TEST(Synthesis, VaryingCoefficientsRoundTrip) {
  const LinearSystem sys = varying_diagonal();
  const MultiTime t0{0.0, 0.0}, t{1.0, 1.0};
  const Vector x0 = (Vector(2) << 1.0, -1.0).finished();
  const Vector y = (Vector(2) << 0.2, 0.5).finished();
  const auto ts = synthesize_transfer(sys, t0, x0, t, y, kCfg);
  ASSERT_TRUE(ts.feasible);
  const auto check = verify_transfer(sys, ts.control, t0, x0, t, kCfg);
  EXPECT_LT(*check.error, 1e-8);
  const Vector stair = solve_controlled(sys, ts.control.controls, t0, x0, t, kCfg,
                                        PolylineCurve::staircase(t0, t));
  EXPECT_LT((stair - y).norm(), 1e-8);
}
