#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "multiflow/core.hpp"
#include "multiflow/system.hpp"

namespace multiflow {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point rule.
const GaussRule& gauss_legendre(std::size_t n);

/// A family of matrix functions P_alpha: D -> M_{rows,cols}, the integrand
/// of the curvilinear integral of P_alpha ds^alpha.
///
/// Evaluation goes through an evaluator obtained per integration, so
/// integrands that carry state along a curve (continuation of a fundamental
/// matrix from node to node) stay pure from the caller's side. Evaluators
/// return all m members at a point; the optional partials evaluator returns
/// dP_alpha/dt^beta at index alpha * m + beta.
class OneFormFamily {
 public:
  using Evaluator = std::function<std::vector<Matrix>(const MultiTime&)>;
  using EvaluatorFactory = std::function<Evaluator()>;

  OneFormFamily(std::size_t m, std::size_t rows, std::size_t cols,
                EvaluatorFactory values, Evaluator partials = {});

  static OneFormFamily from_family(const MatrixFamily& family);
  static OneFormFamily constant(const std::vector<Matrix>& members);

  std::size_t m() const { return m_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool has_partials() const { return static_cast<bool>(partials_); }

  /// Fresh evaluator; points should be visited in curve order.
  Evaluator evaluator() const { return values_(); }
  std::vector<Matrix> partials(const MultiTime& t) const {
    return partials_(t);
  }

 private:
  std::size_t m_;
  std::size_t rows_;
  std::size_t cols_;
  EvaluatorFactory values_;
  Evaluator partials_;
};

/// Gauss-Legendre approximation of sum_alpha int P_alpha(gamma) dgamma^alpha,
/// segment by segment. Zero-length segments contribute nothing.
Matrix integrate_along(const OneFormFamily& P, const PolylineCurve& curve,
                       const NumericConfig& cfg);

/// xi(t) = int_0^1 (t^alpha - t0^alpha) P_alpha((1 - tau) t0 + tau t) dtau.
Matrix primitive(const OneFormFamily& P, const MultiTime& t0,
                 const MultiTime& t, const NumericConfig& cfg);

struct PathIndependenceReport {
  bool pass = false;
  /// ||segment integral - staircase integral||_F.
  double discrepancy = 0.0;
  bool two_path_pass = false;
  /// Worst ||dP_alpha/dt^beta - dP_beta/dt^alpha||_F over the sample grid of
  /// the box spanned by t0 and t; empty when P has no partials.
  std::optional<double> mixed_partial_residual;
  bool mixed_partial_pass = true;
  Matrix segment_value;
  Matrix staircase_value;
};

/// Two-path certificate (straight segment against the axis-ordered
/// staircase) plus, when partials are available, the mixed-partial symmetry
/// check. Both use cfg.residual_rel_tol relative to 1 + the larger norm.
PathIndependenceReport verify_path_independence(const OneFormFamily& P,
                                                const MultiTime& t0,
                                                const MultiTime& t,
                                                const NumericConfig& cfg);

}  // namespace multiflow
