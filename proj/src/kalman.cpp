#include "multiflow/kalman.hpp"

#include <algorithm>
#include <map>

#include "multiflow/flow.hpp"

namespace multiflow {

bool precedes(const ExponentTuple& a, const ExponentTuple& b) {
  if (a.size() != b.size()) {
    throw DimensionError("exponent tuples of different length");
  }
  std::size_t sa = 0, sb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
  }
  if (sa != sb) return sa < sb;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<ExponentTuple> exponent_order(std::size_t m, std::size_t n) {
  if (m == 0 || n == 0) throw InvalidArgument("m and n must be positive");
  std::vector<ExponentTuple> out;
  ExponentTuple k(m, 0);
  for (;;) {
    out.push_back(k);
    std::size_t i = 0;
    while (i < m && ++k[i] == n) k[i++] = 0;
    if (i == m) break;
  }
  std::sort(out.begin(), out.end(), precedes);
  return out;
}

namespace {

void require_constant(const LinearSystem& sys, const char* what) {
  if (!sys.is_constant()) {
    throw InvalidArgument(std::string(what) + " needs constant M and N");
  }
}

std::vector<Matrix> constant_members(const MatrixFamily& f) {
  std::vector<Matrix> out;
  for (std::size_t a = 0; a < f.count(); ++a) out.push_back(f.constant_value(a));
  return out;
}

}  // namespace

ControllabilityMatrix controllability_matrix(const LinearSystem& sys,
                                             const NumericConfig& cfg) {
  require_constant(sys, "controllability matrix");
  require(check_M_commutation(sys, cfg));
  const std::size_t m = sys.m(), n = sys.n(), k = sys.k();
  const auto M = constant_members(sys.M());
  const auto N = constant_members(sys.N());

  const auto order = exponent_order(m, n);
  ControllabilityMatrix G;
  G.value = Matrix::Zero(n, m * order.size() * k);
  Eigen::Index col = 0;
  for (std::size_t a = 0; a < m; ++a) {
    for (const auto& e : order) {
      // Applied to N one factor at a time, innermost M_m first.
      Matrix P = N[a];
      for (std::size_t b = m; b-- > 0;) {
        for (std::size_t p = 0; p < e[b]; ++p) P = M[b] * P;
      }
      G.value.middleCols(col, k) = P;
      G.blocks.push_back({a, e});
      col += static_cast<Eigen::Index>(k);
    }
  }
  return G;
}

std::size_t rank_G(const ControllabilityMatrix& G, const NumericConfig& cfg) {
  return numerical_rank(G.value, cfg);
}

namespace {

// Monomials s^gamma with |gamma| <= d.
std::vector<ExponentTuple> monomials(std::size_t m, std::size_t d) {
  std::vector<ExponentTuple> out;
  ExponentTuple g(m, 0);
  for (;;) {
    std::size_t total = 0;
    for (auto v : g) total += v;
    if (total <= d) out.push_back(g);
    std::size_t i = 0;
    while (i < m && ++g[i] == d + 1) g[i++] = 0;
    if (i == m) break;
  }
  return out;
}

double monomial_value(const ExponentTuple& g, const MultiTime& s) {
  double v = 1.0;
  for (std::size_t a = 0; a < g.size(); ++a) {
    for (std::size_t p = 0; p < g[a]; ++p) v *= s[a];
  }
  return v;
}

}  // namespace

ControlSpaceProbe probe_control_space(const LinearSystem& sys,
                                      const MultiTime& t0, const MultiTime& t,
                                      std::size_t degree,
                                      const NumericConfig& cfg) {
  require_constant(sys, "control-space probe");
  require_same_dim(t0, t);
  const Flow flow(sys, cfg);
  const std::size_t m = sys.m(), n = sys.n(), k = sys.k();
  const auto M = constant_members(sys.M());
  const auto N = constant_members(sys.N());
  const auto mono = monomials(m, degree);
  std::map<ExponentTuple, std::size_t> index;
  for (std::size_t i = 0; i < mono.size(); ++i) index[mono[i]] = i;
  const std::size_t per = mono.size() * k;
  const std::size_t unknowns = m * per;
  auto col = [&](std::size_t alpha, std::size_t g) {
    return static_cast<Eigen::Index>(alpha * per + g * k);
  };

  // M_a N_b c_{b,g} - M_b N_a c_{a,g} + (g_b + 1) N_a c_{a,g+e_b}
  //   - (g_a + 1) N_b c_{b,g+e_a} = 0 for every pair a < b and monomial g.
  const std::size_t pairs = m * (m - 1) / 2;
  Matrix E = Matrix::Zero(pairs * mono.size() * n, unknowns);
  Eigen::Index row = 0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      for (std::size_t g = 0; g < mono.size(); ++g) {
        auto block = [&](std::size_t alpha, std::size_t gi) {
          return E.block(row, col(alpha, gi), static_cast<Eigen::Index>(n),
                         static_cast<Eigen::Index>(k));
        };
        block(b, g) += M[a] * N[b];
        block(a, g) -= M[b] * N[a];
        ExponentTuple up = mono[g];
        ++up[b];
        if (auto it = index.find(up); it != index.end()) {
          block(a, it->second) += static_cast<double>(up[b]) * N[a];
        }
        up = mono[g];
        ++up[a];
        if (auto it = index.find(up); it != index.end()) {
          block(b, it->second) -= static_cast<double>(up[a]) * N[b];
        }
        row += static_cast<Eigen::Index>(n);
      }
    }
  }

  Matrix null;
  if (E.rows() == 0) {
    null = Matrix::Identity(unknowns, unknowns);
  } else {
    Eigen::JacobiSVD<Matrix> svd(E, Eigen::ComputeFullV);
    const std::size_t r = numerical_rank(E, cfg);
    null = svd.matrixV().rightCols(static_cast<Eigen::Index>(unknowns - r));
  }

  ControlSpaceProbe probe;
  probe.degree = degree;
  probe.dimension = static_cast<std::size_t>(null.cols());

  // K maps coefficient vectors to int chi(t0, s) N_a u_a(s) ds^a.
  Matrix K = Matrix::Zero(n, unknowns);
  if (!(t0 == t) && null.cols() > 0) {
    OneFormFamily P(m, n, unknowns, [flow, t0, N, mono, m, n, k, per, unknowns] {
      return OneFormFamily::Evaluator([=](const MultiTime& s) {
        const Matrix Y = flow.chi(t0, s);
        std::vector<Matrix> out;
        for (std::size_t a = 0; a < m; ++a) {
          Matrix S = Matrix::Zero(n, unknowns);
          const Matrix YN = Y * N[a];
          for (std::size_t g = 0; g < mono.size(); ++g) {
            S.middleCols(static_cast<Eigen::Index>(a * per + g * k),
                         static_cast<Eigen::Index>(k)) =
                monomial_value(mono[g], s) * YN;
          }
          out.push_back(S);
        }
        return out;
      });
    });
    K = integrate_along(P, PolylineCurve::segment(t0, t), cfg);
  }
  probe.attained = image_basis(K * null, cfg);
  return probe;
}

AutonomousReport autonomous_analysis(const LinearSystem& sys,
                                     const MultiTime& t0, const Vector& x0,
                                     const MultiTime& t, const Vector& y,
                                     const NumericConfig& cfg) {
  require_constant(sys, "autonomous analysis");
  require_same_dim(t0, t);
  if (static_cast<std::size_t>(x0.size()) != sys.n() ||
      static_cast<std::size_t>(y.size()) != sys.n()) {
    throw DimensionError("states must have length n = " +
                         std::to_string(sys.n()));
  }
  const ControllabilityMatrix G = controllability_matrix(sys, cfg);
  const Flow flow(sys, cfg);
  AutonomousReport r;
  r.gramian_condition = check_gramian_compat(sys, cfg);
  const SubspaceBasis imG = image_basis(G.value, cfg);
  r.rank_G = imG.rank;
  r.complete_by_G = r.rank_G == sys.n();
  r.w = x0 - flow.chi(t0, t) * y;
  r.residual_G = imG.residual(r.w);
  const double tol = cfg.residual_rel_tol * (1.0 + r.w.norm());
  r.transfer_by_G = r.residual_G <= tol;

  if (!r.gramian_condition.pass) {
    r.warnings.push_back(
        "gramian compatibility fails (" + r.gramian_condition.summary() +
        "); conclusions drawn from the rank of G may not hold");
    r.probe = probe_control_space(sys, t0, t, sys.n(), cfg);
    r.transfer_by_probe = r.probe->attained.residual(r.w) <= tol;
    r.transfer_feasible = *r.transfer_by_probe;
    r.completely_controllable = r.probe->attained.rank == sys.n();
    r.authority = "control-space probe";
    if (r.probe->dimension == 0) {
      r.warnings.push_back(
          "no nonzero polynomial control of degree <= " +
          std::to_string(r.probe->degree) +
          " is compatible; the controllability space found is {0}");
    }
    return r;
  }
  if (t0 == t) {
    r.transfer_feasible = r.transfer_by_G;
    r.completely_controllable = r.complete_by_G;
    r.authority = "controllability matrix";
    r.warnings.push_back("t equals t0; the gramian verdict is not defined");
    return r;
  }
  r.gramian_transfer = decide_transfer(sys, t0, x0, t, y, cfg);
  r.gramian_complete = decide_complete(sys, t0, t, cfg);
  r.transfer_feasible = r.gramian_transfer->feasible;
  r.completely_controllable = r.gramian_complete->completely_controllable;
  r.authority = "gramian";
  if (r.transfer_by_G != r.transfer_feasible ||
      r.complete_by_G != r.completely_controllable) {
    r.warnings.push_back(
        "verdicts from G and from the gramian differ for this pair (" +
        std::string(ordering_name(r.gramian_complete->ordering)) +
        " times); the gramian verdict applies");
  }
  if (!r.gramian_complete->caveat.empty()) {
    r.warnings.push_back(r.gramian_complete->caveat);
  }
  return r;
}

RankComparison compare_rank(const LinearSystem& sys, const MultiTime& t0,
                            const MultiTime& t, const NumericConfig& cfg) {
  require_constant(sys, "rank comparison");
  RankComparison c;
  c.rank_G = rank_G(controllability_matrix(sys, cfg), cfg);
  c.rank_C = numerical_rank(controllability_gramian(sys, t0, t, cfg).value, cfg);
  c.equal = c.rank_C == c.rank_G;
  c.inequality_holds = c.rank_C <= c.rank_G;
  const TimeOrdering o = classify_ordering(t0, t);
  c.strictly_ordered = o == TimeOrdering::Forward || o == TimeOrdering::Backward;
  c.consistent = c.inequality_holds && (!c.strictly_ordered || c.equal);
  return c;
}

}  // namespace multiflow
