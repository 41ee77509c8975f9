#include <gtest/gtest.h>

#include <cmath>

#include "multiflow/expr.hpp"
#include "support.hpp"

using namespace multiflow;
using testing_support::central_difference;
using testing_support::random_expr;
using testing_support::Rng;

namespace {

double eval_at(const std::string& text, std::size_t m, MultiTime t) {
  return Expr::parse(text, m).eval(t);
}

}  // namespace

TEST(ExprParse, EvaluatesKnownValues) {
  EXPECT_NEAR(eval_at("exp(-2*t1)", 2, {1.0, 0.0}), 0.1353352832366127, 1e-15);
  EXPECT_DOUBLE_EQ(eval_at("1 + 2*3 - 4/2", 1, {0.0}), 5.0);
  EXPECT_DOUBLE_EQ(eval_at("-t1^2", 1, {3.0}), -9.0);
  EXPECT_DOUBLE_EQ(eval_at("(t1 + t2)^3", 2, {1.0, 1.0}), 8.0);
  EXPECT_DOUBLE_EQ(eval_at("2^3^2", 1, {0.0}), 64.0);
  EXPECT_DOUBLE_EQ(eval_at("1.5e2 + .5", 1, {0.0}), 150.5);
  EXPECT_DOUBLE_EQ(eval_at("t3 - t1", 3, {1.0, 2.0, 7.0}), 6.0);
  EXPECT_NEAR(eval_at("log(exp(t1))", 1, {0.7}), 0.7, 1e-15);
}

TEST(ExprParse, FoldsConstants) {
  const Expr e = Expr::parse("3^2 + 1", 1);
  ASSERT_TRUE(e.literal().has_value());
  EXPECT_DOUBLE_EQ(*e.literal(), 10.0);
  EXPECT_TRUE(Expr::parse("0*t1", 1).is_constant());
  EXPECT_EQ(Expr::parse("1*t1 + 0", 1).kind(), Expr::Kind::Variable);
}

TEST(ExprParse, ReportsErrorPositions) {
  auto position = [](const std::string& text, std::size_t m) -> std::size_t {
    try {
      Expr::parse(text, m);
    } catch (const ParseError& e) {
      return e.position();
    }
    return std::string::npos;
  };
  EXPECT_EQ(position("t1 + t3", 2), 5u);
  EXPECT_EQ(position("t0", 2), 0u);
  EXPECT_EQ(position("1 +", 1), 3u);
  EXPECT_EQ(position("(1 + 2", 1), 6u);
  EXPECT_EQ(position("t1^1.5", 1), 3u);
  EXPECT_EQ(position("sqrt(t1)", 1), 0u);
  EXPECT_EQ(position("", 1), 0u);
  EXPECT_EQ(position("2 $ 3", 1), 2u);
  EXPECT_EQ(position("exp t1", 1), 4u);
}

TEST(ExprEval, DomainErrors) {
  EXPECT_THROW(eval_at("1/(t1 - 1)", 1, {1.0}), DomainError);
  EXPECT_THROW(eval_at("log(t1)", 1, {0.0}), DomainError);
  EXPECT_THROW(eval_at("exp(t1)", 1, {1000.0}), DomainError);
  EXPECT_THROW(Expr::parse("t2", 2).eval(MultiTime{1.0}), DimensionError);
}

TEST(ExprDiff, KnownDerivatives) {
  const Expr e = Expr::parse("sin(t1*t2)", 2);
  EXPECT_NEAR(e.differentiate(0).eval(MultiTime{1.0, 2.0}),
              2.0 * std::cos(2.0), 1e-15);
  EXPECT_NEAR(e.differentiate(0).eval(MultiTime{1.0, 2.0}), -0.8322936730942848,
              1e-15);
  EXPECT_TRUE(Expr::parse("t1^2", 2).differentiate(1).is_constant());
  EXPECT_DOUBLE_EQ(
      Expr::parse("t1^3", 1).differentiate(0).eval(MultiTime{2.0}), 12.0);
  EXPECT_NEAR(Expr::parse("log(t1)/t1", 1).differentiate(0).eval(MultiTime{2.0}),
              (1.0 - std::log(2.0)) / 4.0, 1e-15);
  EXPECT_NEAR(Expr::parse("exp(-2*t1)", 1).differentiate(0).eval(MultiTime{0.5}),
              -2.0 * std::exp(-1.0), 1e-15);
  EXPECT_DOUBLE_EQ(Expr::parse("7", 1).differentiate(0).eval(MultiTime{0.0}), 0);
}

TEST(ExprText, PrintedFormReparses) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const Expr e = random_expr(rng, 2, 4);
    const Expr back = Expr::parse(e.to_string(), 2);
    const MultiTime t{0.3, -0.7};
    EXPECT_NEAR(back.eval(t), e.eval(t), 1e-12 * (1.0 + std::fabs(e.eval(t))))
        << e.to_string();
  }
}

TEST(ExprDiff, MatchesFiniteDifferences) {
  Rng rng(5);
  for (int i = 0; i < 60; ++i) {
    const std::size_t m = 1 + static_cast<std::size_t>(i % 3);
    const Expr e = random_expr(rng, m, 4);
    for (std::size_t axis = 0; axis < m; ++axis) {
      const Expr d = e.differentiate(axis);
      for (int p = 0; p < 3; ++p) {
        const MultiTime t = testing_support::random_point(rng, m, -1.0, 1.0);
        const std::vector<double> x(t.coords().begin(), t.coords().end());
        const double fd = central_difference(
            [&](const std::vector<double>& y) { return e.eval(MultiTime(y)); },
            x, axis);
        const double exact = d.eval(t);
        EXPECT_LE(std::fabs(exact - fd), 1e-6 * std::max(1.0, std::fabs(exact)))
            << e.to_string() << " axis " << axis << " at " << t.to_string();
      }
    }
  }
}
