#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "multiflow/core.hpp"
#include "multiflow/gramian.hpp"
#include "multiflow/system.hpp"

namespace multiflow {

/// (k_1, ..., k_m) with 0 <= k_i <= n - 1.
using ExponentTuple = std::vector<std::size_t>;

/// Block order: ascending total degree, ties broken by lexicographically
/// decreasing tuples.
bool precedes(const ExponentTuple& a, const ExponentTuple& b);

/// All n^m tuples in block order.
std::vector<ExponentTuple> exponent_order(std::size_t m, std::size_t n);

struct ControllabilityBlock {
  std::size_t alpha = 0;  // 0-based
  ExponentTuple exponents;
};

/// G = (G_1 ... G_m); block (alpha, k) = M_1^{k_1} ... M_m^{k_m} N_alpha.
struct ControllabilityMatrix {
  Matrix value;
  std::vector<ControllabilityBlock> blocks;
};

/// Requires a constant system with commuting M.
ControllabilityMatrix controllability_matrix(const LinearSystem& sys,
                                             const NumericConfig& cfg);

std::size_t rank_G(const ControllabilityMatrix& G, const NumericConfig& cfg);

/// Polynomial controls of total degree <= `degree` satisfying control
/// compatibility for a constant system, found as the null space of the
/// coefficient equations, and the span of their endpoint contributions
/// int chi(t0, s) N_alpha u_alpha ds^alpha from t0 to t: a subspace of the
/// controllability space that does not rely on the gramian.
struct ControlSpaceProbe {
  std::size_t degree = 0;
  std::size_t dimension = 0;  // of the polynomial control space
  SubspaceBasis attained;     // endpoint contributions
};

ControlSpaceProbe probe_control_space(const LinearSystem& sys,
                                      const MultiTime& t0, const MultiTime& t,
                                      std::size_t degree,
                                      const NumericConfig& cfg);

struct AutonomousReport {
  ConditionReport gramian_condition;
  std::vector<std::string> warnings;

  std::size_t rank_G = 0;
  bool complete_by_G = false;  // rank G = n
  Vector w;                    // x0 - chi(t0, t) y
  double residual_G = 0.0;
  bool transfer_by_G = false;  // w in Im G

  /// Present when the gramian condition holds and t != t0.
  std::optional<TransferDecision> gramian_transfer;
  std::optional<CompletenessDecision> gramian_complete;

  /// Present when the gramian condition fails.
  std::optional<ControlSpaceProbe> probe;
  std::optional<bool> transfer_by_probe;

  /// The verdict to act on: gramian-based when the condition holds, the
  /// probe otherwise; the G verdict only when neither applies (t == t0).
  bool transfer_feasible = false;
  bool completely_controllable = false;
  std::string authority;
};

AutonomousReport autonomous_analysis(const LinearSystem& sys,
                                     const MultiTime& t0, const Vector& x0,
                                     const MultiTime& t, const Vector& y,
                                     const NumericConfig& cfg);

struct RankComparison {
  std::size_t rank_G = 0;
  std::size_t rank_C = 0;
  bool equal = false;
  bool inequality_holds = false;  // rank_C <= rank_G
  bool strictly_ordered = false;  // equality then expected
  bool consistent = false;
};

/// Gated like the gramian.
RankComparison compare_rank(const LinearSystem& sys, const MultiTime& t0,
                            const MultiTime& t, const NumericConfig& cfg);

}  // namespace multiflow
