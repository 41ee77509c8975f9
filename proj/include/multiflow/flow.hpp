#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "multiflow/core.hpp"
#include "multiflow/system.hpp"

namespace multiflow {

/// chi(to, from), the n x n solution of dX/dt^alpha = M_alpha X with
/// X(from) = I.
struct FundamentalMatrix {
  Matrix value;
  MultiTime from;
  MultiTime to;
  double condition_number = 1.0;
  bool ill_conditioned = false;  // condition number above 1e12
};

class FlowTracker;

/// Evaluates the fundamental matrix of one system. Construction gates on the
/// M-commutation condition; copies share a cache of computed chi values.
class Flow {
 public:
  Flow(const LinearSystem& sys, const NumericConfig& cfg);

  const LinearSystem& system() const { return sys_; }
  const NumericConfig& config() const { return cfg_; }
  const ConditionReport& commutation() const { return commutation_; }

  /// chi(t, t0): matrix exponential for constant M, RK4 along the straight
  /// segment otherwise.
  Matrix chi(const MultiTime& t, const MultiTime& t0) const;

  /// RK4 along the straight segment regardless of structure.
  Matrix chi_rk4(const MultiTime& t, const MultiTime& t0) const;

  /// RK4 along a curve; returns chi(curve.back(), curve.front()).
  Matrix chi_along(const PolylineCurve& curve) const;

  FlowTracker tracker(const MultiTime& anchor, double reference) const;

  /// A(tau) = sum_alpha M_alpha(p) delta^alpha.
  Matrix generator(const MultiTime& p, const Vector& delta) const;

  void require_in_domain(const MultiTime& t) const;

  /// exp(sum_alpha M_alpha delta^alpha); constant M only.
  Matrix expm_sum(const Vector& delta) const;

 private:
  struct Cache {
    std::mutex mu;
    std::map<std::pair<std::vector<double>, std::vector<double>>, Matrix>
        values;
  };

  LinearSystem sys_;
  NumericConfig cfg_;
  ConditionReport commutation_;
  std::shared_ptr<Cache> cache_;
};

/// Follows Y(s) = chi(anchor, s) from point to point. For non-constant M
/// each hop integrates dY/dtau = -Y A(tau) from the previous point, with a
/// step count proportional to the hop length relative to `reference`.
class FlowTracker {
 public:
  FlowTracker(Flow flow, MultiTime anchor, double reference);
  const Matrix& advance(const MultiTime& s);
  const MultiTime& position() const { return pos_; }

 private:
  Flow flow_;
  MultiTime anchor_;
  MultiTime pos_;
  Matrix Y_;
  double reference_;
};

/// Exponential of sum_alpha M_alpha delta^alpha for constant M.
Matrix exp_sum(const std::vector<Matrix>& M, const Vector& delta);

/// One classical RK4 step of dX/dtau = A(tau) X on [tau, tau + h].
template <class Gen>
Matrix rk4_step(const Gen& A, double tau, double h, const Matrix& X) {
  const Matrix A0 = A(tau);
  const Matrix Am = A(tau + 0.5 * h);
  const Matrix A1 = A(tau + h);
  const Matrix k1 = A0 * X;
  const Matrix k2 = Am * (X + 0.5 * h * k1);
  const Matrix k3 = Am * (X + 0.5 * h * k2);
  const Matrix k4 = A1 * (X + h * k3);
  return X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

FundamentalMatrix fundamental_matrix(const LinearSystem& sys,
                                     const MultiTime& t, const MultiTime& t0,
                                     const NumericConfig& cfg);

Vector solve_homogeneous(const LinearSystem& sys, const MultiTime& t0,
                         const Vector& x0, const MultiTime& t,
                         const NumericConfig& cfg);

/// phi(t) = chi(t0, t)^T phi0.
Vector solve_adjoint(const LinearSystem& sys, const MultiTime& t0,
                     const Vector& phi0, const MultiTime& t,
                     const NumericConfig& cfg);

/// x(t) = chi(t, t0) x0 + int_curve chi(t, s) F_alpha(s) ds^alpha. Gated on
/// M-commutation and F-compatibility; `curve` runs from t0 to t.
Vector solve_affine(const LinearSystem& sys, const MatrixFamily& F,
                    const MultiTime& t0, const Vector& x0, const MultiTime& t,
                    const PolylineCurve& curve, const NumericConfig& cfg);

/// solve_affine with F_alpha = N_alpha u_alpha, gated on control
/// compatibility. Uses the straight segment unless a curve is given.
Vector solve_controlled(const LinearSystem& sys, const ControlFamily& u,
                        const MultiTime& t0, const Vector& x0,
                        const MultiTime& t, const NumericConfig& cfg,
                        const std::optional<PolylineCurve>& curve = {});

}  // namespace multiflow
