#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "multiflow/core.hpp"
#include "multiflow/expr.hpp"

namespace multiflow {

/// Closed axis-aligned box standing in for the open convex domain D.
/// Bounds may be infinite.
class DomainBox {
 public:
  DomainBox(std::vector<double> lo, std::vector<double> hi);

  /// The whole of R^m.
  static DomainBox unbounded(std::size_t m);

  std::size_t dim() const { return lo_.size(); }
  double lo(std::size_t alpha) const { return lo_[alpha]; }
  double hi(std::size_t alpha) const { return hi_[alpha]; }
  bool bounded() const;
  bool contains(const MultiTime& t) const;

  /// Tensor grid with `per_axis` points per axis, endpoints included. An
  /// infinite side is replaced by a window of width 2 next to the finite
  /// one, or by [-1, 1] when both sides are infinite.
  std::vector<MultiTime> grid(std::size_t per_axis) const;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

/// Indexed family (P_1, ..., P_m) of rows x cols matrix functions of t,
/// each entry an Expr. Partial derivatives are computed symbolically once.
class MatrixFamily {
 public:
  /// `members[alpha]` holds rows*cols entries in row-major order.
  MatrixFamily(std::size_t rows, std::size_t cols,
               std::vector<std::vector<Expr>> members);

  static MatrixFamily constant(const std::vector<Matrix>& members);
  static MatrixFamily zeros(std::size_t m, std::size_t rows, std::size_t cols);

  std::size_t count() const { return members_.size(); }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  /// True iff every entry of every member is a literal.
  bool is_constant() const { return constant_; }

  const Expr& entry(std::size_t alpha, std::size_t i, std::size_t j) const {
    return members_[alpha][i * cols_ + j];
  }

  /// Member alpha at t. Evaluation failures are rethrown as DomainError
  /// naming the member, the entry and the point.
  Matrix value(std::size_t alpha, const MultiTime& t) const;

  /// d P_alpha / d t^beta at t.
  Matrix partial(std::size_t alpha, std::size_t beta,
                 const MultiTime& t) const;

  /// Member alpha of a constant family (no evaluation needed).
  const Matrix& constant_value(std::size_t alpha) const;

 private:
  Matrix evaluate(const std::vector<Expr>& entries, const MultiTime& t,
                  std::string_view what, std::size_t alpha) const;

  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::vector<Expr>> members_;
  std::vector<std::vector<Expr>> partials_;  // index alpha * m + beta
  std::vector<Matrix> constants_;
  bool constant_ = true;
};

/// dx/dt^alpha = M_alpha(t) x + N_alpha(t) u_alpha(t), alpha = 1..m.
class LinearSystem {
 public:
  LinearSystem(MatrixFamily M, MatrixFamily N, DomainBox domain);
  LinearSystem(MatrixFamily M, MatrixFamily N);

  std::size_t m() const { return M_.count(); }
  std::size_t n() const { return M_.rows(); }
  std::size_t k() const { return N_.cols(); }
  const MatrixFamily& M() const { return M_; }
  const MatrixFamily& N() const { return N_; }
  const DomainBox& domain() const { return domain_; }
  bool is_constant() const { return M_.is_constant() && N_.is_constant(); }

 private:
  MatrixFamily M_;
  MatrixFamily N_;
  DomainBox domain_;
};

/// A control family (u_1, ..., u_m), u_alpha: D -> R^k, with its first
/// partial derivatives. Both callbacks return all members at one point:
/// `values(t)[alpha]` and `partials(t)[alpha * m + beta]` = du_alpha/dt^beta.
class ControlFamily {
 public:
  using Values = std::function<std::vector<Vector>(const MultiTime&)>;

  ControlFamily(std::size_t m, std::size_t k, Values values, Values partials,
                bool constant);

  /// Expression-valued control; `family` must be k x 1.
  static ControlFamily from_family(const MatrixFamily& family);
  static ControlFamily zero(std::size_t m, std::size_t k);

  std::size_t m() const { return m_; }
  std::size_t k() const { return k_; }
  bool is_constant() const { return constant_; }

  std::vector<Vector> values(const MultiTime& t) const { return values_(t); }
  std::vector<Vector> partials(const MultiTime& t) const {
    return partials_(t);
  }

 private:
  std::size_t m_;
  std::size_t k_;
  Values values_;
  Values partials_;
  bool constant_;
};

enum class Condition {
  MCommutation,
  FCompatibility,
  ControlCompatibility,
  GramianCompatibility,
};

std::string_view condition_name(Condition c);

/// Outcome of sampling one compatibility identity L(alpha,beta) = R(alpha,beta)
/// over pairs alpha < beta and a set of points.
struct ConditionReport {
  Condition condition = Condition::MCommutation;
  double max_residual = 0.0;  // Frobenius norm of the worst L - R
  double scale = 0.0;         // largest Frobenius norm of any L or R seen
  bool pass = true;           // max_residual <= tol * (1 + scale)
  double tolerance = 0.0;
  std::optional<MultiTime> worst_point;
  std::pair<std::size_t, std::size_t> worst_pair{0, 0};  // 0-based
  std::size_t points_checked = 0;

  std::string summary() const;
};

/// Thrown when an operation is gated on a condition that did not hold.
class GateError : public Error {
 public:
  explicit GateError(ConditionReport report);
  const ConditionReport& report() const { return report_; }

 private:
  ConditionReport report_;
};

/// Throws GateError if the report did not pass.
void require(const ConditionReport& report);

ConditionReport check_M_commutation(const LinearSystem& sys,
                                    const NumericConfig& cfg);

/// `F` is an n x 1 family of forcing terms.
ConditionReport check_F_compatibility(const LinearSystem& sys,
                                      const MatrixFamily& F,
                                      const NumericConfig& cfg);

ConditionReport check_control_compat(const LinearSystem& sys,
                                     const ControlFamily& u,
                                     const NumericConfig& cfg);

ConditionReport check_gramian_compat(const LinearSystem& sys,
                                     const NumericConfig& cfg);

/// L - R of the gramian compatibility identity for the pair (alpha, beta)
/// at t. Antisymmetric under swapping the pair.
Matrix gramian_condition_residual(const LinearSystem& sys, std::size_t alpha,
                                  std::size_t beta, const MultiTime& t);

/// Sample points used by the checks: a single point when every family
/// involved is constant, otherwise the domain grid.
std::vector<MultiTime> sample_points(const DomainBox& domain, bool constant,
                                     const NumericConfig& cfg);

}  // namespace multiflow
