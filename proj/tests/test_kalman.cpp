#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "multiflow/kalman.hpp"
#include "support.hpp"

using namespace multiflow;
using testing_support::commuting_system;
using testing_support::example1;
using testing_support::example2;
using testing_support::invariant_plane_system;
using testing_support::parse_family;
using testing_support::random_matrix;
using testing_support::random_point;
using testing_support::random_vector;
using testing_support::Rng;

namespace {

const NumericConfig kCfg;

std::size_t degree(const ExponentTuple& e) {
  std::size_t s = 0;
  for (auto v : e) s += v;
  return s;
}

// Single-time system with an uncontrolled block: rank r of n.
LinearSystem deficient_system(Rng& rng, long n, long r) {
  Matrix P = random_matrix(rng, n, n);
  P += 3.0 * Matrix::Identity(n, n);
  Matrix A = Matrix::Zero(n, n);
  A.topLeftCorner(r, r) = random_matrix(rng, r, r, 0.6);
  A.bottomRightCorner(n - r, n - r) = random_matrix(rng, n - r, n - r, 0.6);
  A.topRightCorner(r, n - r) = random_matrix(rng, r, n - r, 0.6);
  Matrix B = Matrix::Zero(n, 1);
  B.topRows(r) = random_matrix(rng, r, 1);
  const Matrix Pinv = P.inverse();
  return LinearSystem(MatrixFamily::constant({P * A * Pinv}),
                      MatrixFamily::constant({P * B}));
}

}  // namespace

TEST(ExponentOrder, SmallCases) {
  const std::vector<ExponentTuple> want{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1},
                                        {0, 2}, {2, 1}, {1, 2}, {2, 2}};
  EXPECT_EQ(exponent_order(2, 3), want);
  EXPECT_EQ(exponent_order(1, 3), (std::vector<ExponentTuple>{{0}, {1}, {2}}));
  const auto o32 = exponent_order(3, 2);
  ASSERT_EQ(o32.size(), 8u);
  EXPECT_EQ(o32[1], (ExponentTuple{1, 0, 0}));
  EXPECT_EQ(o32[3], (ExponentTuple{0, 0, 1}));
  EXPECT_EQ(o32[4], (ExponentTuple{1, 1, 0}));
  EXPECT_EQ(o32.back(), (ExponentTuple{1, 1, 1}));
  EXPECT_THROW(exponent_order(0, 2), InvalidArgument);
}

TEST(ExponentOrder, IsATotalOrderOverAllTuples) {
  for (std::size_t m = 1; m <= 4; ++m) {
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto order = exponent_order(m, n);
      ASSERT_EQ(order.size(), static_cast<std::size_t>(std::pow(n, m)));
      std::set<ExponentTuple> seen(order.begin(), order.end());
      EXPECT_EQ(seen.size(), order.size());
      for (const auto& e : order) {
        ASSERT_EQ(e.size(), m);
        for (auto v : e) EXPECT_LT(v, n);
      }
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        EXPECT_TRUE(precedes(order[i], order[i + 1]));
        EXPECT_FALSE(precedes(order[i + 1], order[i]));
        EXPECT_LE(degree(order[i]), degree(order[i + 1]));
        if (degree(order[i]) == degree(order[i + 1])) {
          EXPECT_GT(order[i], order[i + 1]);
        }
      }
      for (const auto& e : order) EXPECT_FALSE(precedes(e, e));
    }
  }
}

TEST(ControllabilityMatrix, ExampleOne) {
  const auto G = controllability_matrix(example1(), kCfg);
  Matrix want = Matrix::Zero(2, 8);
  want(0, 0) = want(0, 1) = 1.0;
  want(1, 4) = 1.0;
  EXPECT_EQ(G.value, want);
  ASSERT_EQ(G.blocks.size(), 8u);
  EXPECT_EQ(G.blocks[0].alpha, 0u);
  EXPECT_EQ(G.blocks[4].alpha, 1u);
  EXPECT_EQ(G.blocks[5].exponents, (ExponentTuple{1, 0}));
  EXPECT_EQ(rank_G(G, kCfg), 2u);
}

TEST(ControllabilityMatrix, ExampleTwo) {
  const auto G = controllability_matrix(example2(), kCfg);
  EXPECT_EQ(G.value.rows(), 3);
  EXPECT_EQ(G.value.cols(), 81);
  EXPECT_EQ(rank_G(G, kCfg), 3u);
  // Block (alpha, k) for k = (1, 1, 0) is M^2 e_alpha.
  const Matrix M = testing_support::cyclic3();
  const auto order = exponent_order(3, 3);
  const auto pos =
      std::find(order.begin(), order.end(), ExponentTuple{1, 1, 0}) - order.begin();
  for (long a = 0; a < 3; ++a) {
    EXPECT_EQ(G.value.col(a * 27 + pos), (M * M).col(a));
  }
}

TEST(ControllabilityMatrix, ReducesToClassicalKalman) {
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const long n = 2 + i % 4, k = 1 + i % 2;
    const Matrix M = random_matrix(rng, n, n), N = random_matrix(rng, n, k);
    const LinearSystem sys(MatrixFamily::constant({M}), MatrixFamily::constant({N}));
    const auto G = controllability_matrix(sys, kCfg);
    EXPECT_EQ(G.value, testing_support::classical_kalman(M, N));
  }
}

TEST(ControllabilityMatrix, Refusals) {
  const LinearSystem zeroN(MatrixFamily::constant({Matrix::Identity(2, 2)}),
                           MatrixFamily::zeros(1, 2, 1));
  EXPECT_EQ(rank_G(controllability_matrix(zeroN, kCfg), kCfg), 0u);
  const LinearSystem varying(parse_family(1, 1, {{"t1"}}, 1),
                             MatrixFamily::zeros(1, 1, 1),
                             DomainBox({0.0}, {1.0}));
  EXPECT_THROW(controllability_matrix(varying, kCfg), InvalidArgument);
  Matrix M1(2, 2), M2(2, 2);
  M1 << 0, 1, 0, 0;
  M2 << 0, 0, 1, 0;
  const LinearSystem noncommuting(MatrixFamily::constant({M1, M2}),
                                  MatrixFamily::zeros(2, 2, 1));
  EXPECT_THROW(controllability_matrix(noncommuting, kCfg), GateError);
}

TEST(Probe, ExampleOneSeparableControls) {
  // Compatible polynomial controls are u1(t1), u2(t2): 2 (d + 1) of them.
  const auto p = probe_control_space(example1(), MultiTime{0.0, 0.0},
                                     MultiTime{1.0, 1.0}, 2, kCfg);
  EXPECT_EQ(p.dimension, 6u);
  EXPECT_EQ(p.attained.rank, 2u);
  const auto q = probe_control_space(example1(), MultiTime{0.0, 0.0},
                                     MultiTime{1.0, 0.0}, 2, kCfg);
  EXPECT_EQ(q.attained.rank, 1u);
  EXPECT_LT(q.attained.residual((Vector(2) << 1.0, 0.0).finished()), 1e-12);
}

TEST(Probe, ExampleTwoHasOnlyZeroControl) {
  const auto p = probe_control_space(example2(), MultiTime::zeros(3),
                                     MultiTime{1.0, 1.0, 1.0}, 3, kCfg);
  EXPECT_EQ(p.dimension, 0u);
  EXPECT_EQ(p.attained.rank, 0u);
}

TEST(Probe, StaysInsideTheGramianImage) {
  Rng rng(12);
  for (int i = 0; i < 10; ++i) {
    const LinearSystem sys = invariant_plane_system(rng, 2);
    const MultiTime t0{0.0, 0.0}, t{0.8, 1.1};
    const auto p = probe_control_space(sys, t0, t, 2, kCfg);
    const auto C = controllability_space(sys, t0, t, kCfg);
    EXPECT_GT(p.dimension, 0u);
    EXPECT_LE(p.attained.rank, C.basis.rank);
    for (Eigen::Index j = 0; j < p.attained.columns.cols(); ++j) {
      EXPECT_LT(C.basis.residual(p.attained.columns.col(j)), 1e-8);
    }
  }
}

TEST(Autonomous, ExampleOne) {
  const MultiTime t0{0.0, 0.0}, t{1.0, 0.0};
  const Vector zero = Vector::Zero(2);
  const auto r = autonomous_analysis(example1(), t0, (Vector(2) << 0, 1).finished(),
                                     t, zero, kCfg);
  EXPECT_TRUE(r.gramian_condition.pass);
  EXPECT_EQ(r.rank_G, 2u);
  EXPECT_TRUE(r.complete_by_G);
  EXPECT_TRUE(r.transfer_by_G);
  EXPECT_EQ(r.authority, "gramian");
  EXPECT_FALSE(r.transfer_feasible);
  EXPECT_FALSE(r.completely_controllable);
  EXPECT_FALSE(r.warnings.empty());
  const auto s = autonomous_analysis(example1(), t0, (Vector(2) << 0, 1).finished(),
                                     MultiTime{1.0, 1.0}, zero, kCfg);
  EXPECT_TRUE(s.transfer_feasible);
  EXPECT_TRUE(s.completely_controllable);
  EXPECT_TRUE(s.warnings.empty());
  const auto e = autonomous_analysis(example1(), t0, zero, t0, zero, kCfg);
  EXPECT_EQ(e.authority, "controllability matrix");
}

TEST(Autonomous, ExampleTwo) {
  const auto r = autonomous_analysis(example2(), MultiTime::zeros(3),
                                     (Vector(3) << 1, 0, 0).finished(),
                                     MultiTime{1.0, 1.0, 1.0}, Vector::Zero(3), kCfg);
  EXPECT_FALSE(r.gramian_condition.pass);
  EXPECT_EQ(r.rank_G, 3u);
  EXPECT_TRUE(r.complete_by_G);
  EXPECT_TRUE(r.transfer_by_G);
  ASSERT_TRUE(r.probe.has_value());
  EXPECT_EQ(r.probe->dimension, 0u);
  EXPECT_EQ(r.authority, "control-space probe");
  EXPECT_FALSE(r.transfer_feasible);
  EXPECT_FALSE(r.completely_controllable);
  EXPECT_GE(r.warnings.size(), 2u);
  EXPECT_FALSE(r.gramian_transfer.has_value());
}

TEST(RankComparison, ExampleOnePairs) {
  const auto weak = compare_rank(example1(), MultiTime{0.0, 0.0},
                                 MultiTime{1.0, 0.0}, kCfg);
  EXPECT_EQ(weak.rank_C, 1u);
  EXPECT_EQ(weak.rank_G, 2u);
  EXPECT_TRUE(weak.inequality_holds);
  EXPECT_FALSE(weak.equal);
  EXPECT_FALSE(weak.strictly_ordered);
  EXPECT_TRUE(weak.consistent);
  const auto strict = compare_rank(example1(), MultiTime{0.0, 0.0},
                                   MultiTime{1.0, 1.0}, kCfg);
  EXPECT_EQ(strict.rank_C, 2u);
  EXPECT_TRUE(strict.equal);
  EXPECT_TRUE(strict.strictly_ordered);
  EXPECT_THROW(compare_rank(example2(), MultiTime::zeros(3), MultiTime{1, 1, 1}, kCfg),
               GateError);
}

TEST(RankComparison, RandomSystems) {
  Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    const std::size_t m = 1 + static_cast<std::size_t>(i % 3);
    LinearSystem sys = [&] {
      switch (i % 3) {
        case 0: return commuting_system(rng, m, 3, 1 + i % 2, true);
        case 1: return invariant_plane_system(rng, m);
        default: return deficient_system(rng, 4, 1 + (i / 3) % 3);
      }
    }();
    const std::size_t dim = sys.m();
    const MultiTime t0 = random_point(rng, dim, -0.5, 0.0);
    MultiTime t = random_point(rng, dim, 0.5, 1.0);
    if (i % 4 == 1) t = random_point(rng, dim, -1.5, -1.0);  // backward
    const auto c = compare_rank(sys, t0, t, kCfg);
    EXPECT_TRUE(c.inequality_holds) << i;
    EXPECT_TRUE(c.strictly_ordered) << i;
    EXPECT_TRUE(c.equal) << i << " rank_C " << c.rank_C << " rank_G " << c.rank_G;
    EXPECT_TRUE(c.consistent) << i;
    if (i % 3 == 1) {
      EXPECT_EQ(c.rank_G, 2u);
    } else if (i % 3 == 2) {
      EXPECT_EQ(c.rank_G, static_cast<std::size_t>(1 + (i / 3) % 3));
    }
  }
}

TEST(RankComparison, TransferAgreesWithGWhenStrictlyOrdered) {
  Rng rng(31);
  for (int i = 0; i < 30; ++i) {
    const LinearSystem sys = invariant_plane_system(rng, 2);
    const MultiTime t0{0.0, 0.0}, t{0.6, 0.9};
    const Vector x0 = random_vector(rng, 4);
    Vector y = random_vector(rng, 4);
    if (i % 2 == 0) {
      y = Flow(sys, kCfg).chi(t, t0) * (x0 + sys.N().constant_value(0) * random_vector(rng, 2));
    }
    const auto r = autonomous_analysis(sys, t0, x0, t, y, kCfg);
    EXPECT_EQ(r.transfer_feasible, i % 2 == 0);
    EXPECT_EQ(r.transfer_by_G, r.transfer_feasible);
    EXPECT_EQ(r.complete_by_G, r.completely_controllable);
    EXPECT_FALSE(r.completely_controllable);
  }
}
