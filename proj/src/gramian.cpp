#include "multiflow/gramian.hpp"

#include <algorithm>
#include <memory>

namespace multiflow {

std::string_view gramian_kind_name(GramianKind kind) {
  return kind == GramianKind::Controllability ? "controllability"
                                              : "reachability";
}

OneFormFamily gramian_integrand(const Flow& flow, const MultiTime& anchor,
                                double reference) {
  const LinearSystem& sys = flow.system();
  const std::size_t m = sys.m();
  auto values = [flow, anchor, reference, m] {
    auto tracker =
        std::make_shared<FlowTracker>(flow.tracker(anchor, reference));
    return OneFormFamily::Evaluator([tracker, flow, m](const MultiTime& s) {
      const Matrix& Y = tracker->advance(s);
      std::vector<Matrix> out;
      for (std::size_t a = 0; a < m; ++a) {
        const Matrix YN = Y * flow.system().N().value(a, s);
        out.push_back(YN * YN.transpose());
      }
      return out;
    });
  };
  // d/ds^b of Y N N^T Y^T with dY/ds^b = -Y M_b.
  auto partials = [flow, anchor, m](const MultiTime& s) {
    const LinearSystem& sys = flow.system();
    const Matrix Y = flow.chi(anchor, s);
    std::vector<Matrix> out;
    for (std::size_t a = 0; a < m; ++a) {
      const Matrix Na = sys.N().value(a, s);
      const Matrix NNt = Na * Na.transpose();
      for (std::size_t b = 0; b < m; ++b) {
        const Matrix Mb = sys.M().value(b, s);
        const Matrix dN = sys.N().partial(a, b, s);
        const Matrix inner = -Mb * NNt + dN * Na.transpose() +
                             Na * dN.transpose() - NNt * Mb.transpose();
        out.push_back(Y * inner * Y.transpose());
      }
    }
    return out;
  };
  return OneFormFamily(m, sys.n(), sys.n(), values, partials);
}

namespace {

Gramian integrate_gramian(const Flow& flow, const PolylineCurve& curve,
                          GramianKind kind) {
  const MultiTime& anchor =
      kind == GramianKind::Controllability ? curve.front() : curve.back();
  const double reference = curve.back().minus(curve.front()).norm();
  Gramian g{Matrix::Zero(flow.system().n(), flow.system().n()), curve.front(),
            curve.back(), kind};
  if (reference == 0.0) return g;
  g.value = integrate_along(gramian_integrand(flow, anchor, reference), curve,
                            flow.config());
  return g;
}

Gramian gated_gramian(const LinearSystem& sys, const MultiTime& t0,
                      const MultiTime& t, GramianKind kind,
                      const NumericConfig& cfg) {
  require_same_dim(t0, t);
  const Flow flow(sys, cfg);
  require(check_gramian_compat(sys, cfg));
  return integrate_gramian(flow, PolylineCurve::segment(t0, t), kind);
}

}  // namespace

Gramian controllability_gramian(const LinearSystem& sys, const MultiTime& t0,
                                const MultiTime& t, const NumericConfig& cfg) {
  return gated_gramian(sys, t0, t, GramianKind::Controllability, cfg);
}

Gramian reachability_gramian(const LinearSystem& sys, const MultiTime& t0,
                             const MultiTime& t, const NumericConfig& cfg) {
  return gated_gramian(sys, t0, t, GramianKind::Reachability, cfg);
}

Gramian gramian_along(const LinearSystem& sys, const PolylineCurve& curve,
                      GramianKind kind, const NumericConfig& cfg) {
  const Flow flow(sys, cfg);
  Gramian g = integrate_gramian(flow, curve, kind);
  g.path_dependent = !check_gramian_compat(sys, cfg).pass;
  return g;
}

double SubspaceBasis::residual(const Vector& w) const {
  if (rank == 0) return w.norm();
  return (w - columns * (columns.transpose() * w)).norm();
}

namespace {

double rank_threshold(const Matrix& A, const Vector& sv,
                      const NumericConfig& cfg) {
  if (sv.size() == 0) return 0.0;
  return cfg.rank_rel_tol * sv[0] *
         static_cast<double>(std::max(A.rows(), A.cols()));
}

std::size_t count_above(const Vector& sv, double threshold) {
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > threshold) ++r;
  }
  return r;
}

}  // namespace

SubspaceBasis image_basis(const Matrix& A, const NumericConfig& cfg) {
  SubspaceBasis b;
  if (A.size() == 0) {
    b.columns = Matrix::Zero(A.rows(), 0);
    return b;
  }
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU);
  b.singular_values = svd.singularValues();
  b.rank = count_above(b.singular_values,
                       rank_threshold(A, b.singular_values, cfg));
  b.columns = svd.matrixU().leftCols(static_cast<Eigen::Index>(b.rank));
  return b;
}

std::size_t numerical_rank(const Matrix& A, const NumericConfig& cfg) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(A);
  const Vector sv = svd.singularValues();
  return count_above(sv, rank_threshold(A, sv, cfg));
}

Vector min_norm_solve(const Matrix& A, const Vector& b,
                      const NumericConfig& cfg) {
  if (A.rows() != b.size()) {
    throw DimensionError("right-hand side length does not match the matrix");
  }
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector sv = svd.singularValues();
  const std::size_t r = count_above(sv, rank_threshold(A, sv, cfg));
  Vector v = Vector::Zero(A.cols());
  for (std::size_t i = 0; i < r; ++i) {
    const auto j = static_cast<Eigen::Index>(i);
    v += (svd.matrixU().col(j).dot(b) / sv[j]) * svd.matrixV().col(j);
  }
  return v;
}

TimeOrdering classify_ordering(const MultiTime& t0, const MultiTime& t) {
  require_same_dim(t0, t);
  bool all_gt = true, all_lt = true, all_ge = true, all_le = true;
  for (std::size_t a = 0; a < t.dim(); ++a) {
    all_gt = all_gt && t[a] > t0[a];
    all_lt = all_lt && t[a] < t0[a];
    all_ge = all_ge && t[a] >= t0[a];
    all_le = all_le && t[a] <= t0[a];
  }
  if (all_ge && all_le) return TimeOrdering::Equal;
  if (all_gt) return TimeOrdering::Forward;
  if (all_lt) return TimeOrdering::Backward;
  if (all_ge) return TimeOrdering::WeakForward;
  if (all_le) return TimeOrdering::WeakBackward;
  return TimeOrdering::Unordered;
}

std::string_view ordering_name(TimeOrdering o) {
  switch (o) {
    case TimeOrdering::Equal: return "equal";
    case TimeOrdering::Forward: return "forward";
    case TimeOrdering::Backward: return "backward";
    case TimeOrdering::WeakForward: return "weakly-forward";
    case TimeOrdering::WeakBackward: return "weakly-backward";
    case TimeOrdering::Unordered: return "pseudo";
  }
  return "unknown";
}

bool image_identifies_space(TimeOrdering o) {
  return o != TimeOrdering::Unordered;
}

std::string ordering_caveat(TimeOrdering o) {
  switch (o) {
    case TimeOrdering::Forward:
    case TimeOrdering::Backward:
      return {};
    case TimeOrdering::WeakForward:
    case TimeOrdering::WeakBackward:
      return "times are ordered but not strictly; the verdict concerns "
             "pseudo-controllability";
    case TimeOrdering::Unordered:
      return "times are not componentwise ordered; the gramian image is only "
             "known to lie inside the controllability space";
    case TimeOrdering::Equal:
      return "the two multitimes coincide";
  }
  return {};
}

ControllabilitySpace controllability_space(const LinearSystem& sys,
                                           const MultiTime& t0,
                                           const MultiTime& t,
                                           const NumericConfig& cfg) {
  ControllabilitySpace cs{{}, classify_ordering(t0, t), true,
                          controllability_gramian(sys, t0, t, cfg)};
  cs.guaranteed = image_identifies_space(cs.ordering);
  cs.basis = image_basis(cs.gramian.value, cfg);
  return cs;
}

TransferDecision decide_transfer(const LinearSystem& sys, const MultiTime& t0,
                                 const Vector& x0, const MultiTime& t,
                                 const Vector& y, const NumericConfig& cfg) {
  if (static_cast<std::size_t>(x0.size()) != sys.n() ||
      static_cast<std::size_t>(y.size()) != sys.n()) {
    throw DimensionError("states must have length n = " +
                         std::to_string(sys.n()));
  }
  const ControllabilitySpace cs = controllability_space(sys, t0, t, cfg);
  const Flow flow(sys, cfg);
  TransferDecision d;
  d.w = x0 - flow.chi(t0, t) * y;
  d.residual = cs.basis.residual(d.w);
  d.feasible = d.residual <= cfg.residual_rel_tol * (1.0 + d.w.norm());
  d.ordering = cs.ordering;
  d.guaranteed = cs.guaranteed;
  d.rank = cs.basis.rank;
  return d;
}

CompletenessDecision decide_complete(const LinearSystem& sys,
                                     const MultiTime& t0, const MultiTime& t,
                                     const NumericConfig& cfg) {
  require_same_dim(t0, t);
  if (t0 == t) {
    throw InvalidArgument("complete controllability needs t != t0");
  }
  const ControllabilitySpace cs = controllability_space(sys, t0, t, cfg);
  CompletenessDecision d;
  d.rank = cs.basis.rank;
  d.completely_controllable = d.rank == sys.n();
  d.completely_reachable = d.completely_controllable;
  d.ordering = cs.ordering;
  d.caveat = ordering_caveat(cs.ordering);
  return d;
}

}  // namespace multiflow
