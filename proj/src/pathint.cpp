#include "multiflow/pathint.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace multiflow {

namespace {

GaussRule compute_gauss_legendre(std::size_t n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t j = 2; j <= n; ++j) {
        const double jj = static_cast<double>(j);
        const double p2 = ((2.0 * jj - 1.0) * x * p1 - (jj - 1.0) * p0) / jj;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    if (n == 1) {
      x = 0.0;
      dp = 1.0;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(std::size_t n) {
  if (n == 0) throw InvalidArgument("Gauss rule needs at least one node");
  static std::mutex mu;
  static std::map<std::size_t, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

OneFormFamily::OneFormFamily(std::size_t m, std::size_t rows, std::size_t cols,
                             EvaluatorFactory values, Evaluator partials)
    : m_(m),
      rows_(rows),
      cols_(cols),
      values_(std::move(values)),
      partials_(std::move(partials)) {
  if (m_ == 0 || rows_ == 0 || cols_ == 0) {
    throw DimensionError("one-form family needs positive m and shape");
  }
}

OneFormFamily OneFormFamily::from_family(const MatrixFamily& family) {
  const std::size_t m = family.count();
  Evaluator values = [family, m](const MultiTime& t) {
    std::vector<Matrix> out;
    for (std::size_t a = 0; a < m; ++a) out.push_back(family.value(a, t));
    return out;
  };
  Evaluator partials = [family, m](const MultiTime& t) {
    std::vector<Matrix> out;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        out.push_back(family.partial(a, b, t));
      }
    }
    return out;
  };
  return OneFormFamily(
      m, family.rows(), family.cols(), [values] { return values; }, partials);
}

OneFormFamily OneFormFamily::constant(const std::vector<Matrix>& members) {
  return from_family(MatrixFamily::constant(members));
}

namespace {

void check_curve(const OneFormFamily& P, const PolylineCurve& curve) {
  if (curve.dim() != P.m()) {
    throw DimensionError("curve dimension does not match one-form count");
  }
}

Matrix checked_sum(const std::vector<Matrix>& values, const Vector& weights,
                   std::size_t rows, std::size_t cols) {
  if (values.size() != static_cast<std::size_t>(weights.size())) {
    throw DimensionError("one-form evaluator returned the wrong member count");
  }
  Matrix acc = Matrix::Zero(rows, cols);
  for (std::size_t a = 0; a < values.size(); ++a) {
    if (weights[a] == 0.0) continue;
    acc += weights[a] * values[a];
  }
  return acc;
}

}  // namespace

Matrix integrate_along(const OneFormFamily& P, const PolylineCurve& curve,
                       const NumericConfig& cfg) {
  check_curve(P, curve);
  const GaussRule& rule = gauss_legendre(cfg.quad_points_per_segment);
  auto eval = P.evaluator();
  Matrix total = Matrix::Zero(P.rows(), P.cols());
  const auto& pts = curve.waypoints();
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    const Vector delta = pts[s + 1].minus(pts[s]);
    if (delta.isZero(0.0)) continue;
    Matrix seg = Matrix::Zero(P.rows(), P.cols());
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double local = 0.5 * (rule.nodes[q] + 1.0);
      seg += (0.5 * rule.weights[q]) *
             checked_sum(eval(lerp(pts[s], pts[s + 1], local)), delta,
                         P.rows(), P.cols());
    }
    total += seg;
  }
  return total;
}

Matrix primitive(const OneFormFamily& P, const MultiTime& t0,
                 const MultiTime& t, const NumericConfig& cfg) {
  require_same_dim(t0, t);
  if (t0.dim() != P.m()) {
    throw DimensionError("point dimension does not match one-form count");
  }
  const Vector delta = t.minus(t0);
  if (delta.isZero(0.0)) return Matrix::Zero(P.rows(), P.cols());
  const GaussRule& rule = gauss_legendre(cfg.quad_points_per_segment);
  auto eval = P.evaluator();
  Matrix xi = Matrix::Zero(P.rows(), P.cols());
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    // Map [-1, 1] onto tau in [0, 1].
    const double tau = 0.5 * (rule.nodes[q] + 1.0);
    xi += (0.5 * rule.weights[q]) *
          checked_sum(eval(lerp(t0, t, tau)), delta, P.rows(), P.cols());
  }
  return xi;
}

PathIndependenceReport verify_path_independence(const OneFormFamily& P,
                                                const MultiTime& t0,
                                                const MultiTime& t,
                                                const NumericConfig& cfg) {
  require_same_dim(t0, t);
  if (t0 == t) {
    throw InvalidArgument("path independence needs distinct endpoints");
  }
  PathIndependenceReport r;
  r.segment_value = integrate_along(P, PolylineCurve::segment(t0, t), cfg);
  r.staircase_value = integrate_along(P, PolylineCurve::staircase(t0, t), cfg);
  r.discrepancy = frobenius(r.segment_value - r.staircase_value);
  const double scale =
      std::max(frobenius(r.segment_value), frobenius(r.staircase_value));
  r.two_path_pass = r.discrepancy <= cfg.residual_rel_tol * (1.0 + scale);

  if (P.has_partials()) {
    std::vector<double> lo(t0.dim()), hi(t0.dim());
    for (std::size_t a = 0; a < t0.dim(); ++a) {
      lo[a] = std::min(t0[a], t[a]);
      hi[a] = std::max(t0[a], t[a]);
    }
    double worst = 0.0;
    double side = 0.0;
    std::vector<std::vector<double>> axes(t0.dim());
    const std::size_t g = cfg.grid_samples_per_axis;
    for (std::size_t a = 0; a < t0.dim(); ++a) {
      if (lo[a] == hi[a] || g == 1) {
        axes[a] = {0.5 * (lo[a] + hi[a])};
        continue;
      }
      for (std::size_t i = 0; i < g; ++i) {
        axes[a].push_back(lo[a] + (hi[a] - lo[a]) * static_cast<double>(i) /
                                      static_cast<double>(g - 1));
      }
    }
    const std::size_t m = t0.dim();
    std::vector<std::size_t> idx(m, 0);
    for (;;) {
      std::vector<double> c(m);
      for (std::size_t a = 0; a < m; ++a) c[a] = axes[a][idx[a]];
      const auto d = P.partials(MultiTime(c));
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
          worst = std::max(worst, frobenius(d[a * m + b] - d[b * m + a]));
          side = std::max({side, frobenius(d[a * m + b]),
                           frobenius(d[b * m + a])});
        }
      }
      std::size_t a = 0;
      while (a < m && ++idx[a] == axes[a].size()) idx[a++] = 0;
      if (a == m) break;
    }
    r.mixed_partial_residual = worst;
    r.mixed_partial_pass = worst <= cfg.residual_rel_tol * (1.0 + side);
  }
  r.pass = r.two_path_pass && r.mixed_partial_pass;
  return r;
}

}  // namespace multiflow
