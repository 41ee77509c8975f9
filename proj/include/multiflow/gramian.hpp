#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "multiflow/core.hpp"
#include "multiflow/flow.hpp"
#include "multiflow/pathint.hpp"
#include "multiflow/system.hpp"

namespace multiflow {

enum class GramianKind { Controllability, Reachability };

std::string_view gramian_kind_name(GramianKind kind);

struct Gramian {
  Matrix value;
  MultiTime from;
  MultiTime to;
  GramianKind kind = GramianKind::Controllability;
  /// Set when computed along a forced curve while gramian compatibility
  /// fails; the value then depends on the curve.
  bool path_dependent = false;
};

/// s -> chi(anchor, s) N_alpha(s) N_alpha(s)^T chi(anchor, s)^T, with its
/// analytic partials. `reference` is the curve length used to size the
/// continuation steps.
OneFormFamily gramian_integrand(const Flow& flow, const MultiTime& anchor,
                                double reference);

/// C(t0, t) along the straight segment. Gated on M-commutation and gramian
/// compatibility.
Gramian controllability_gramian(const LinearSystem& sys, const MultiTime& t0,
                                const MultiTime& t, const NumericConfig& cfg);

/// R(t0, t) = int chi(t, s) N_alpha N_alpha^T chi(t, s)^T ds^alpha.
Gramian reachability_gramian(const LinearSystem& sys, const MultiTime& t0,
                             const MultiTime& t, const NumericConfig& cfg);

/// Gramian along an explicit curve, gated on M-commutation only. The result
/// is marked path-dependent when gramian compatibility fails.
Gramian gramian_along(const LinearSystem& sys, const PolylineCurve& curve,
                      GramianKind kind, const NumericConfig& cfg);

/// Orthonormal basis of the image of a matrix.
struct SubspaceBasis {
  Matrix columns;
  std::size_t rank = 0;
  Vector singular_values;  // descending

  /// ||w - P w|| with P the orthogonal projector onto the span.
  double residual(const Vector& w) const;
};

/// Singular values above rank_rel_tol * sigma_max * max(rows, cols) count.
SubspaceBasis image_basis(const Matrix& A, const NumericConfig& cfg);
std::size_t numerical_rank(const Matrix& A, const NumericConfig& cfg);

/// Minimum-norm least-squares solution of A v = b by truncated SVD.
Vector min_norm_solve(const Matrix& A, const Vector& b,
                      const NumericConfig& cfg);

/// Componentwise relation of t to t0.
enum class TimeOrdering {
  Equal,
  Forward,         // t > t0 in every component
  Backward,        // t < t0 in every component
  WeakForward,     // t >= t0, some components equal
  WeakBackward,    // t <= t0, some components equal
  Unordered,       // pseudo pair
};

TimeOrdering classify_ordering(const MultiTime& t0, const MultiTime& t);
std::string_view ordering_name(TimeOrdering o);

/// True when the image of the gramian is known to equal the controllability
/// space, i.e. the pair is componentwise ordered.
bool image_identifies_space(TimeOrdering o);

/// Caveat attached to verdicts for pairs outside that guarantee, or empty.
std::string ordering_caveat(TimeOrdering o);

struct ControllabilitySpace {
  SubspaceBasis basis;
  TimeOrdering ordering = TimeOrdering::Equal;
  bool guaranteed = true;
  Gramian gramian;
};

ControllabilitySpace controllability_space(const LinearSystem& sys,
                                           const MultiTime& t0,
                                           const MultiTime& t,
                                           const NumericConfig& cfg);

struct TransferDecision {
  bool feasible = false;
  double residual = 0.0;
  Vector w;  // x0 - chi(t0, t) y
  TimeOrdering ordering = TimeOrdering::Equal;
  bool guaranteed = true;
  std::size_t rank = 0;
};

/// Can (t0, x0) be steered to (t, y)? Membership of x0 - chi(t0, t) y in the
/// image of C(t0, t).
TransferDecision decide_transfer(const LinearSystem& sys, const MultiTime& t0,
                                 const Vector& x0, const MultiTime& t,
                                 const Vector& y, const NumericConfig& cfg);

struct CompletenessDecision {
  bool completely_controllable = false;
  bool completely_reachable = false;
  std::size_t rank = 0;
  TimeOrdering ordering = TimeOrdering::Equal;
  /// Non-empty when the pair is not strictly ordered.
  std::string caveat;
};

/// rank C(t0, t) = n. Throws InvalidArgument when t == t0.
CompletenessDecision decide_complete(const LinearSystem& sys,
                                     const MultiTime& t0, const MultiTime& t,
                                     const NumericConfig& cfg);

}  // namespace multiflow
