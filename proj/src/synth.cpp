#include "multiflow/synth.hpp"

#include "multiflow/flow.hpp"

namespace multiflow {

SynthesizedControl candidate_control(const LinearSystem& sys,
                                     const MultiTime& t0, const Vector& v,
                                     const NumericConfig& cfg) {
  if (static_cast<std::size_t>(v.size()) != sys.n()) {
    throw DimensionError("v must have length n = " + std::to_string(sys.n()));
  }
  const Flow flow(sys, cfg);
  flow.require_in_domain(t0);
  const std::size_t m = sys.m();
  // q(s) = chi(t0, s)^T v; dq/ds^b = -M_b^T q.
  auto values = [flow, t0, v, m](const MultiTime& s) {
    const Vector q = flow.chi(t0, s).transpose() * v;
    std::vector<Vector> out;
    for (std::size_t a = 0; a < m; ++a) {
      out.push_back(flow.system().N().value(a, s).transpose() * q);
    }
    return out;
  };
  auto partials = [flow, t0, v, m](const MultiTime& s) {
    const LinearSystem& sys = flow.system();
    const Vector q = flow.chi(t0, s).transpose() * v;
    std::vector<Vector> out;
    for (std::size_t a = 0; a < m; ++a) {
      const Matrix Na = sys.N().value(a, s);
      for (std::size_t b = 0; b < m; ++b) {
        out.push_back(sys.N().partial(a, b, s).transpose() * q -
                      Na.transpose() * (sys.M().value(b, s).transpose() * q));
      }
    }
    return out;
  };
  const bool zero = v.isZero(0.0);
  ConditionReport check = check_gramian_compat(sys, cfg);
  return SynthesizedControl{
      v,
      t0,
      zero || check.pass,
      ControlFamily(m, sys.k(), values, partials, zero),
      check,
      std::nullopt};
}

TransferSynthesis synthesize_transfer(const LinearSystem& sys,
                                      const MultiTime& t0, const Vector& x0,
                                      const MultiTime& t, const Vector& y,
                                      const NumericConfig& cfg) {
  if (static_cast<std::size_t>(x0.size()) != sys.n() ||
      static_cast<std::size_t>(y.size()) != sys.n()) {
    throw DimensionError("states must have length n = " +
                         std::to_string(sys.n()));
  }
  Gramian C = controllability_gramian(sys, t0, t, cfg);
  const Flow flow(sys, cfg);
  const Vector w = flow.chi(t0, t) * y - x0;
  const Vector v = min_norm_solve(C.value, w, cfg);
  const double residual = (C.value * v - w).norm();
  TransferSynthesis ts{candidate_control(sys, t0, v, cfg),
                       residual <= cfg.residual_rel_tol * (1.0 + w.norm()),
                       residual,
                       w,
                       classify_ordering(t0, t),
                       std::move(C)};
  ts.control.target = y;
  return ts;
}

TransferCheck verify_transfer(const LinearSystem& sys,
                              const SynthesizedControl& sc,
                              const MultiTime& t0, const Vector& x0,
                              const MultiTime& t, const NumericConfig& cfg) {
  if (!sc.valid) throw GateError(sc.gramian_check);
  TransferCheck tc;
  tc.endpoint = solve_controlled(sys, sc.controls, t0, x0, t, cfg);
  if (sc.target) tc.error = (tc.endpoint - *sc.target).norm();
  return tc;
}

}  // namespace multiflow
