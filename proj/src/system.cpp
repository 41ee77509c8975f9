#include "multiflow/system.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace multiflow {

// ---------------------------------------------------------------- DomainBox

DomainBox::DomainBox(std::vector<double> lo, std::vector<double> hi)
    : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.empty() || lo_.size() != hi_.size()) {
    throw DimensionError("domain bounds must have matching positive length");
  }
  for (std::size_t a = 0; a < lo_.size(); ++a) {
    if (std::isnan(lo_[a]) || std::isnan(hi_[a]) || !(lo_[a] < hi_[a])) {
      throw InvalidArgument("domain axis " + std::to_string(a + 1) +
                            " needs lo < hi");
    }
  }
}

DomainBox DomainBox::unbounded(std::size_t m) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return DomainBox(std::vector<double>(m, -inf), std::vector<double>(m, inf));
}

bool DomainBox::bounded() const {
  for (std::size_t a = 0; a < dim(); ++a) {
    if (!std::isfinite(lo_[a]) || !std::isfinite(hi_[a])) return false;
  }
  return true;
}

bool DomainBox::contains(const MultiTime& t) const {
  if (t.dim() != dim()) return false;
  for (std::size_t a = 0; a < dim(); ++a) {
    if (t[a] < lo_[a] || t[a] > hi_[a]) return false;
  }
  return true;
}

std::vector<MultiTime> DomainBox::grid(std::size_t per_axis) const {
  const std::size_t m = dim();
  std::vector<std::vector<double>> axes(m);
  for (std::size_t a = 0; a < m; ++a) {
    double lo = lo_[a];
    double hi = hi_[a];
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      lo = -1.0;
      hi = 1.0;
    } else if (!std::isfinite(lo)) {
      lo = hi - 2.0;
    } else if (!std::isfinite(hi)) {
      hi = lo + 2.0;
    }
    if (per_axis == 1) {
      axes[a] = {0.5 * (lo + hi)};
      continue;
    }
    for (std::size_t i = 0; i < per_axis; ++i) {
      const double s = static_cast<double>(i) / static_cast<double>(per_axis - 1);
      axes[a].push_back(i + 1 == per_axis ? hi : lo + s * (hi - lo));
    }
  }
  std::vector<MultiTime> out;
  std::vector<std::size_t> idx(m, 0);
  for (;;) {
    std::vector<double> c(m);
    for (std::size_t a = 0; a < m; ++a) c[a] = axes[a][idx[a]];
    out.emplace_back(std::move(c));
    std::size_t a = 0;
    while (a < m && ++idx[a] == axes[a].size()) idx[a++] = 0;
    if (a == m) break;
  }
  return out;
}

// ------------------------------------------------------------- MatrixFamily

MatrixFamily::MatrixFamily(std::size_t rows, std::size_t cols,
                           std::vector<std::vector<Expr>> members)
    : rows_(rows), cols_(cols), members_(std::move(members)) {
  if (rows_ == 0 || cols_ == 0 || members_.empty()) {
    throw DimensionError("matrix family needs positive shape and count");
  }
  const std::size_t m = members_.size();
  for (const auto& member : members_) {
    if (member.size() != rows_ * cols_) {
      throw DimensionError("all family members must share the declared shape");
    }
    for (const auto& e : member) {
      if (e.arity() > m) {
        throw DimensionError("entry references a variable beyond t" +
                             std::to_string(m));
      }
      constant_ = constant_ && e.is_constant();
    }
  }
  partials_.resize(m * m);
  for (std::size_t alpha = 0; alpha < m; ++alpha) {
    for (std::size_t beta = 0; beta < m; ++beta) {
      auto& d = partials_[alpha * m + beta];
      d.reserve(rows_ * cols_);
      for (const auto& e : members_[alpha]) d.push_back(e.differentiate(beta));
    }
  }
  if (constant_) {
    for (const auto& member : members_) {
      Matrix c(rows_, cols_);
      for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
          c(i, j) = *member[i * cols_ + j].literal();
        }
      }
      constants_.push_back(std::move(c));
    }
  }
}

MatrixFamily MatrixFamily::constant(const std::vector<Matrix>& members) {
  if (members.empty()) throw DimensionError("empty matrix family");
  const auto rows = static_cast<std::size_t>(members.front().rows());
  const auto cols = static_cast<std::size_t>(members.front().cols());
  std::vector<std::vector<Expr>> exprs;
  for (const auto& mat : members) {
    if (static_cast<std::size_t>(mat.rows()) != rows ||
        static_cast<std::size_t>(mat.cols()) != cols) {
      throw DimensionError("all family members must share the declared shape");
    }
    std::vector<Expr> entries;
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
      for (Eigen::Index j = 0; j < mat.cols(); ++j) {
        entries.push_back(Expr::constant(mat(i, j)));
      }
    }
    exprs.push_back(std::move(entries));
  }
  return MatrixFamily(rows, cols, std::move(exprs));
}

MatrixFamily MatrixFamily::zeros(std::size_t m, std::size_t rows,
                                 std::size_t cols) {
  return constant(std::vector<Matrix>(
      m, Matrix::Zero(static_cast<Eigen::Index>(rows),
                      static_cast<Eigen::Index>(cols))));
}

Matrix MatrixFamily::evaluate(const std::vector<Expr>& entries,
                              const MultiTime& t, std::string_view what,
                              std::size_t alpha) const {
  Matrix out(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      try {
        out(i, j) = entries[i * cols_ + j].eval(t);
      } catch (const DomainError& e) {
        throw DomainError(std::string(e.what()) + " evaluating " +
                          std::string(what) + " of member " +
                          std::to_string(alpha + 1) + " entry (" +
                          std::to_string(i + 1) + "," + std::to_string(j + 1) +
                          ") at t=" + t.to_string());
      }
    }
  }
  return out;
}

Matrix MatrixFamily::value(std::size_t alpha, const MultiTime& t) const {
  if (t.dim() != count()) {
    throw DimensionError("point dimension does not match family count");
  }
  if (constant_) return constants_[alpha];
  return evaluate(members_[alpha], t, "value", alpha);
}

Matrix MatrixFamily::partial(std::size_t alpha, std::size_t beta,
                             const MultiTime& t) const {
  if (t.dim() != count()) {
    throw DimensionError("point dimension does not match family count");
  }
  if (constant_) return Matrix::Zero(rows_, cols_);
  return evaluate(partials_[alpha * count() + beta], t, "derivative", alpha);
}

const Matrix& MatrixFamily::constant_value(std::size_t alpha) const {
  if (!constant_) throw InvalidArgument("family is not constant");
  return constants_[alpha];
}

// ------------------------------------------------------------- LinearSystem

LinearSystem::LinearSystem(MatrixFamily M, MatrixFamily N, DomainBox domain)
    : M_(std::move(M)), N_(std::move(N)), domain_(std::move(domain)) {
  if (M_.rows() != M_.cols()) throw DimensionError("M members must be square");
  if (N_.rows() != M_.rows()) {
    throw DimensionError("N members must have n rows");
  }
  if (N_.count() != M_.count() || domain_.dim() != M_.count()) {
    throw DimensionError("M, N and the domain must all have dimension m");
  }
  if (!is_constant() && !domain_.bounded()) {
    throw InvalidArgument(
        "a system with time-varying entries needs a bounded domain");
  }
}

LinearSystem::LinearSystem(MatrixFamily M, MatrixFamily N)
    : LinearSystem(M, std::move(N), DomainBox::unbounded(M.count())) {}

// ------------------------------------------------------------ ControlFamily

ControlFamily::ControlFamily(std::size_t m, std::size_t k, Values values,
                             Values partials, bool constant)
    : m_(m),
      k_(k),
      values_(std::move(values)),
      partials_(std::move(partials)),
      constant_(constant) {
  if (m_ == 0 || k_ == 0) throw DimensionError("control family needs m, k > 0");
}

ControlFamily ControlFamily::from_family(const MatrixFamily& family) {
  if (family.cols() != 1) {
    throw DimensionError("control members must be column vectors");
  }
  const std::size_t m = family.count();
  auto values = [family, m](const MultiTime& t) {
    std::vector<Vector> out;
    for (std::size_t a = 0; a < m; ++a) out.push_back(family.value(a, t));
    return out;
  };
  auto partials = [family, m](const MultiTime& t) {
    std::vector<Vector> out;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        out.push_back(family.partial(a, b, t));
      }
    }
    return out;
  };
  return ControlFamily(m, family.rows(), values, partials,
                       family.is_constant());
}

ControlFamily ControlFamily::zero(std::size_t m, std::size_t k) {
  return from_family(MatrixFamily::zeros(m, k, 1));
}

// --------------------------------------------------------------- Conditions

std::string_view condition_name(Condition c) {
  switch (c) {
    case Condition::MCommutation: return "M-commutation";
    case Condition::FCompatibility: return "F-compatibility";
    case Condition::ControlCompatibility: return "control-compatibility";
    case Condition::GramianCompatibility: return "gramian-compatibility";
  }
  return "?";
}

std::string ConditionReport::summary() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s %s: residual %.12g (tolerance %.12g)",
                std::string(condition_name(condition)).c_str(),
                pass ? "pass" : "FAIL", max_residual, tolerance);
  std::string s = buf;
  if (!pass && worst_point) {
    s += " worst at t=" + worst_point->to_string() + " pair (" +
         std::to_string(worst_pair.first + 1) + "," +
         std::to_string(worst_pair.second + 1) + ")";
  }
  return s;
}

GateError::GateError(ConditionReport report)
    : Error("refused: " + report.summary()), report_(std::move(report)) {}

void require(const ConditionReport& report) {
  if (!report.pass) throw GateError(report);
}

std::vector<MultiTime> sample_points(const DomainBox& domain, bool constant,
                                     const NumericConfig& cfg) {
  if (constant) {
    // Derivative terms vanish and the identity is t-independent.
    std::vector<double> c(domain.dim(), 0.0);
    for (std::size_t a = 0; a < domain.dim(); ++a) {
      if (!domain.contains(MultiTime(c))) {
        c[a] = std::isfinite(domain.lo(a)) ? domain.lo(a) : domain.hi(a);
      }
    }
    return {MultiTime(std::move(c))};
  }
  return domain.grid(cfg.grid_samples_per_axis);
}

namespace {

using Sides = std::pair<Matrix, Matrix>;
using PairSides = std::function<Sides(std::size_t, std::size_t)>;

ConditionReport sample_condition(
    Condition condition, std::size_t m, const std::vector<MultiTime>& points,
    const NumericConfig& cfg,
    const std::function<PairSides(const MultiTime&)>& at_point) {
  ConditionReport r;
  r.condition = condition;
  r.tolerance = cfg.residual_rel_tol;
  for (const auto& t : points) {
    const PairSides sides = at_point(t);
    ++r.points_checked;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a + 1; b < m; ++b) {
        auto [lhs, rhs] = sides(a, b);
        const double res = frobenius(lhs - rhs);
        r.scale = std::max({r.scale, frobenius(lhs), frobenius(rhs)});
        if (!r.worst_point || res > r.max_residual) {
          r.max_residual = res;
          r.worst_point = t;
          r.worst_pair = {a, b};
        }
      }
    }
  }
  r.pass = r.max_residual <= cfg.residual_rel_tol * (1.0 + r.scale);
  return r;
}

}  // namespace

ConditionReport check_M_commutation(const LinearSystem& sys,
                                    const NumericConfig& cfg) {
  const auto& M = sys.M();
  const std::size_t m = sys.m();
  return sample_condition(
      Condition::MCommutation, m,
      sample_points(sys.domain(), M.is_constant(), cfg), cfg,
      [&](const MultiTime& t) -> PairSides {
        std::vector<Matrix> val;
        for (std::size_t a = 0; a < m; ++a) val.push_back(M.value(a, t));
        return [&M, &t, val](std::size_t a, std::size_t b) {
          Matrix lhs = M.partial(a, b, t) + val[a] * val[b];
          Matrix rhs = M.partial(b, a, t) + val[b] * val[a];
          return Sides{std::move(lhs), std::move(rhs)};
        };
      });
}

ConditionReport check_F_compatibility(const LinearSystem& sys,
                                      const MatrixFamily& F,
                                      const NumericConfig& cfg) {
  if (F.count() != sys.m() || F.rows() != sys.n() || F.cols() != 1) {
    throw DimensionError("F must be a family of m vectors of length n");
  }
  const auto& M = sys.M();
  const std::size_t m = sys.m();
  return sample_condition(
      Condition::FCompatibility, m,
      sample_points(sys.domain(), M.is_constant() && F.is_constant(), cfg),
      cfg, [&](const MultiTime& t) -> PairSides {
        std::vector<Matrix> mv, fv;
        for (std::size_t a = 0; a < m; ++a) {
          mv.push_back(M.value(a, t));
          fv.push_back(F.value(a, t));
        }
        return [&F, &t, mv, fv](std::size_t a, std::size_t b) {
          Matrix lhs = mv[a] * fv[b] + F.partial(a, b, t);
          Matrix rhs = mv[b] * fv[a] + F.partial(b, a, t);
          return Sides{std::move(lhs), std::move(rhs)};
        };
      });
}

ConditionReport check_control_compat(const LinearSystem& sys,
                                     const ControlFamily& u,
                                     const NumericConfig& cfg) {
  if (u.m() != sys.m() || u.k() != sys.k()) {
    throw DimensionError("control family must have m members of length k");
  }
  const std::size_t m = sys.m();
  const auto& M = sys.M();
  const auto& N = sys.N();
  const bool constant = sys.is_constant() && u.is_constant();
  return sample_condition(
      Condition::ControlCompatibility, m,
      sample_points(sys.domain(), constant, cfg), cfg,
      [&](const MultiTime& t) -> PairSides {
        std::vector<Matrix> mv, nv;
        for (std::size_t a = 0; a < m; ++a) {
          mv.push_back(M.value(a, t));
          nv.push_back(N.value(a, t));
        }
        std::vector<Vector> uv, du;
        try {
          uv = u.values(t);
          du = u.partials(t);
        } catch (const DomainError& e) {
          throw DomainError(std::string(e.what()) +
                            " evaluating control at t=" + t.to_string());
        }
        return [&N, &t, mv, nv, uv, du, m](std::size_t a, std::size_t b) {
          Matrix lhs = mv[a] * nv[b] * uv[b] + N.partial(a, b, t) * uv[a] +
                       nv[a] * du[a * m + b];
          Matrix rhs = mv[b] * nv[a] * uv[a] + N.partial(b, a, t) * uv[b] +
                       nv[b] * du[b * m + a];
          return Sides{std::move(lhs), std::move(rhs)};
        };
      });
}

namespace {

// Left side of the gramian compatibility identity for (alpha, beta); the
// right side is the same expression with the pair swapped.
Matrix gramian_side(const std::vector<Matrix>& mv, const std::vector<Matrix>& nv,
                    const Matrix& dN_alpha_beta, std::size_t a,
                    std::size_t b) {
  const Matrix nnb = nv[b] * nv[b].transpose();
  return mv[a] * nnb + dN_alpha_beta * nv[a].transpose() +
         nv[a] * dN_alpha_beta.transpose() + nnb * mv[a].transpose();
}

}  // namespace

Matrix gramian_condition_residual(const LinearSystem& sys, std::size_t alpha,
                                  std::size_t beta, const MultiTime& t) {
  std::vector<Matrix> mv, nv;
  for (std::size_t a = 0; a < sys.m(); ++a) {
    mv.push_back(sys.M().value(a, t));
    nv.push_back(sys.N().value(a, t));
  }
  return gramian_side(mv, nv, sys.N().partial(alpha, beta, t), alpha, beta) -
         gramian_side(mv, nv, sys.N().partial(beta, alpha, t), beta, alpha);
}

ConditionReport check_gramian_compat(const LinearSystem& sys,
                                     const NumericConfig& cfg) {
  const std::size_t m = sys.m();
  const auto& M = sys.M();
  const auto& N = sys.N();
  return sample_condition(
      Condition::GramianCompatibility, m,
      sample_points(sys.domain(), sys.is_constant(), cfg), cfg,
      [&](const MultiTime& t) -> PairSides {
        std::vector<Matrix> mv, nv;
        for (std::size_t a = 0; a < m; ++a) {
          mv.push_back(M.value(a, t));
          nv.push_back(N.value(a, t));
        }
        return [&N, &t, mv, nv](std::size_t a, std::size_t b) {
          return Sides{gramian_side(mv, nv, N.partial(a, b, t), a, b),
                       gramian_side(mv, nv, N.partial(b, a, t), b, a)};
        };
      });
}

}  // namespace multiflow
