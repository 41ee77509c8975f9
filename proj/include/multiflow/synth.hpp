#pragma once

#include <optional>

#include "multiflow/core.hpp"
#include "multiflow/gramian.hpp"
#include "multiflow/system.hpp"

namespace multiflow {

/// u_alpha(s) = N_alpha(s)^T chi(t0, s)^T v.
struct SynthesizedControl {
  Vector v;
  MultiTime anchor;
  /// Gramian compatibility held, so the family is an admissible control.
  bool valid = false;
  ControlFamily controls;
  ConditionReport gramian_check;
  std::optional<Vector> target;
};

/// Gated on M-commutation; validity is reported, not enforced.
SynthesizedControl candidate_control(const LinearSystem& sys,
                                     const MultiTime& t0, const Vector& v,
                                     const NumericConfig& cfg);

struct TransferSynthesis {
  SynthesizedControl control;
  bool feasible = false;
  double residual = 0.0;  // ||C v - w||
  Vector w;               // chi(t0, t) y - x0
  TimeOrdering ordering = TimeOrdering::Equal;
  Gramian gramian;
};

/// Minimum-norm v with C(t0, t) v = chi(t0, t) y - x0. Gated like the
/// gramian; the resulting control carries y as its target.
TransferSynthesis synthesize_transfer(const LinearSystem& sys,
                                      const MultiTime& t0, const Vector& x0,
                                      const MultiTime& t, const Vector& y,
                                      const NumericConfig& cfg);

struct TransferCheck {
  Vector endpoint;
  std::optional<double> error;  // ||endpoint - target|| when a target is set
};

/// Runs the controlled solver with the synthesized family. Throws GateError
/// when the control is not valid.
TransferCheck verify_transfer(const LinearSystem& sys,
                              const SynthesizedControl& sc,
                              const MultiTime& t0, const Vector& x0,
                              const MultiTime& t, const NumericConfig& cfg);

}  // namespace multiflow
