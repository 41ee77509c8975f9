#include "multiflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

#include "multiflow/pathint.hpp"

namespace multiflow {

namespace {

std::vector<double> key_of(const MultiTime& t) {
  return std::vector<double>(t.coords().begin(), t.coords().end());
}

// Condition number in the 2-norm; infinite for singular input.
double condition_number(const Matrix& X) {
  Eigen::JacobiSVD<Matrix> svd(X);
  const auto& s = svd.singularValues();
  const double lo = s[s.size() - 1];
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / lo;
}

}  // namespace

Matrix exp_sum(const std::vector<Matrix>& M, const Vector& delta) {
  if (M.empty() || static_cast<std::size_t>(delta.size()) != M.size()) {
    throw DimensionError("exponent needs one increment per member");
  }
  Matrix S = Matrix::Zero(M[0].rows(), M[0].cols());
  for (std::size_t a = 0; a < M.size(); ++a) S += delta[a] * M[a];
  return S.exp();
}

Flow::Flow(const LinearSystem& sys, const NumericConfig& cfg)
    : sys_(sys),
      cfg_(cfg),
      commutation_(check_M_commutation(sys, cfg)),
      cache_(std::make_shared<Cache>()) {
  cfg_.validate();
  require(commutation_);
}

void Flow::require_in_domain(const MultiTime& t) const {
  if (t.dim() != sys_.m()) {
    throw DimensionError("point " + t.to_string() + " has dimension " +
                         std::to_string(t.dim()) + ", system has m = " +
                         std::to_string(sys_.m()));
  }
  if (!sys_.M().is_constant() && !sys_.domain().contains(t)) {
    throw DomainError("point " + t.to_string() + " lies outside the domain");
  }
}

Matrix Flow::generator(const MultiTime& p, const Vector& delta) const {
  Matrix A = Matrix::Zero(sys_.n(), sys_.n());
  for (std::size_t a = 0; a < sys_.m(); ++a) {
    if (delta[a] == 0.0) continue;
    A += delta[a] * sys_.M().value(a, p);
  }
  return A;
}

Matrix Flow::expm_sum(const Vector& delta) const {
  std::vector<Matrix> M;
  for (std::size_t a = 0; a < sys_.m(); ++a) {
    M.push_back(sys_.M().constant_value(a));
  }
  return exp_sum(M, delta);
}

Matrix Flow::chi(const MultiTime& t, const MultiTime& t0) const {
  require_in_domain(t);
  require_in_domain(t0);
  if (t == t0) return Matrix::Identity(sys_.n(), sys_.n());
  if (sys_.M().is_constant()) return expm_sum(t.minus(t0));

  const auto key = std::make_pair(key_of(t), key_of(t0));
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->values.find(key);
    if (it != cache_->values.end()) return it->second;
  }
  Matrix X = chi_rk4(t, t0);
  std::lock_guard<std::mutex> lock(cache_->mu);
  cache_->values.emplace(key, X);
  return X;
}

Matrix Flow::chi_rk4(const MultiTime& t, const MultiTime& t0) const {
  return chi_along(PolylineCurve::segment(t0, t));
}

Matrix Flow::chi_along(const PolylineCurve& curve) const {
  Matrix X = Matrix::Identity(sys_.n(), sys_.n());
  const auto& pts = curve.waypoints();
  for (const auto& p : pts) require_in_domain(p);
  const std::size_t steps = cfg_.ode_steps_per_segment;
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    const Vector delta = pts[s + 1].minus(pts[s]);
    if (delta.isZero(0.0)) continue;
    const auto& a = pts[s];
    const auto& b = pts[s + 1];
    auto A = [&](double tau) { return generator(lerp(a, b, tau), delta); };
    const double h = 1.0 / static_cast<double>(steps);
    for (std::size_t i = 0; i < steps; ++i) {
      X = rk4_step(A, static_cast<double>(i) * h, h, X);
    }
  }
  return X;
}

FlowTracker::FlowTracker(Flow flow, MultiTime anchor, double reference)
    : flow_(std::move(flow)),
      anchor_(anchor),
      pos_(anchor),
      Y_(Matrix::Identity(flow_.system().n(), flow_.system().n())),
      reference_(reference) {
  flow_.require_in_domain(anchor_);
}

const Matrix& FlowTracker::advance(const MultiTime& s) {
  if (s == pos_) return Y_;
  flow_.require_in_domain(s);
  const LinearSystem& sys = flow_.system();
  if (sys.M().is_constant()) {
    Y_ = flow_.expm_sum(anchor_.minus(s));
    pos_ = s;
    return Y_;
  }
  const Vector delta = s.minus(pos_);
  const std::size_t base = flow_.config().ode_steps_per_segment;
  std::size_t steps = base;
  if (reference_ > 0.0) {
    steps = static_cast<std::size_t>(
        std::ceil(static_cast<double>(base) * delta.norm() / reference_));
  }
  steps = std::max<std::size_t>(steps, 8);
  const MultiTime from = pos_;
  // dY/dtau = -Y A(tau); transpose to reuse the left-multiplying stepper.
  auto At = [&](double tau) {
    return Matrix(-flow_.generator(lerp(from, s, tau), delta).transpose());
  };
  Matrix Z = Y_.transpose();
  const double h = 1.0 / static_cast<double>(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    Z = rk4_step(At, static_cast<double>(i) * h, h, Z);
  }
  Y_ = Z.transpose();
  pos_ = s;
  return Y_;
}

FlowTracker Flow::tracker(const MultiTime& anchor, double reference) const {
  return FlowTracker(*this, anchor, reference);
}

FundamentalMatrix fundamental_matrix(const LinearSystem& sys,
                                     const MultiTime& t, const MultiTime& t0,
                                     const NumericConfig& cfg) {
  const Flow flow(sys, cfg);
  FundamentalMatrix fm{flow.chi(t, t0), t0, t};
  fm.condition_number = condition_number(fm.value);
  fm.ill_conditioned = !(fm.condition_number <= 1e12);
  return fm;
}

namespace {

void require_vector(const Vector& v, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(v.size()) != n) {
    throw DimensionError(std::string(what) + " has length " +
                         std::to_string(v.size()) + ", expected " +
                         std::to_string(n));
  }
}

// int_curve chi(t0, s) F_alpha(s) ds^alpha with F given per node.
Vector transported_integral(
    const Flow& flow, const MultiTime& t0, const PolylineCurve& curve,
    std::function<std::vector<Vector>(const MultiTime&)> forcing) {
  const LinearSystem& sys = flow.system();
  const double reference = curve.back().minus(curve.front()).norm();
  OneFormFamily P(sys.m(), sys.n(), 1, [flow, t0, reference, forcing] {
    auto tracker = std::make_shared<FlowTracker>(flow.tracker(t0, reference));
    return OneFormFamily::Evaluator(
        [tracker, forcing](const MultiTime& s) {
          const Matrix& Y = tracker->advance(s);
          std::vector<Matrix> out;
          for (const Vector& f : forcing(s)) out.push_back(Y * f);
          return out;
        });
  });
  return integrate_along(P, curve, flow.config()).col(0);
}

void require_endpoints(const PolylineCurve& curve, const MultiTime& t0,
                       const MultiTime& t) {
  if (!(curve.front() == t0) || !(curve.back() == t)) {
    throw InvalidArgument("curve must run from " + t0.to_string() + " to " +
                          t.to_string());
  }
}

}  // namespace

Vector solve_homogeneous(const LinearSystem& sys, const MultiTime& t0,
                         const Vector& x0, const MultiTime& t,
                         const NumericConfig& cfg) {
  require_vector(x0, sys.n(), "x0");
  return Flow(sys, cfg).chi(t, t0) * x0;
}

Vector solve_adjoint(const LinearSystem& sys, const MultiTime& t0,
                     const Vector& phi0, const MultiTime& t,
                     const NumericConfig& cfg) {
  require_vector(phi0, sys.n(), "phi0");
  return Flow(sys, cfg).chi(t0, t).transpose() * phi0;
}

Vector solve_affine(const LinearSystem& sys, const MatrixFamily& F,
                    const MultiTime& t0, const Vector& x0, const MultiTime& t,
                    const PolylineCurve& curve, const NumericConfig& cfg) {
  require_vector(x0, sys.n(), "x0");
  require_endpoints(curve, t0, t);
  const Flow flow(sys, cfg);
  require(check_F_compatibility(sys, F, cfg));
  const Matrix chi = flow.chi(t, t0);
  if (t == t0) return x0;
  const std::size_t m = sys.m();
  const Vector integral =
      transported_integral(flow, t0, curve, [F, m](const MultiTime& s) {
        std::vector<Vector> out;
        for (std::size_t a = 0; a < m; ++a) out.push_back(F.value(a, s).col(0));
        return out;
      });
  return chi * (x0 + integral);
}

Vector solve_controlled(const LinearSystem& sys, const ControlFamily& u,
                        const MultiTime& t0, const Vector& x0,
                        const MultiTime& t, const NumericConfig& cfg,
                        const std::optional<PolylineCurve>& curve) {
  require_vector(x0, sys.n(), "x0");
  if (u.m() != sys.m() || u.k() != sys.k()) {
    throw DimensionError("control family shape does not match the system");
  }
  const PolylineCurve path = curve ? *curve : PolylineCurve::segment(t0, t);
  require_endpoints(path, t0, t);
  const Flow flow(sys, cfg);
  require(check_control_compat(sys, u, cfg));
  const Matrix chi = flow.chi(t, t0);
  if (t == t0) return x0;
  const Vector integral =
      transported_integral(flow, t0, path, [sys, u](const MultiTime& s) {
        const auto values = u.values(s);
        std::vector<Vector> out;
        for (std::size_t a = 0; a < sys.m(); ++a) {
          out.push_back(sys.N().value(a, s) * values[a]);
        }
        return out;
      });
  return chi * (x0 + integral);
}

}  // namespace multiflow
