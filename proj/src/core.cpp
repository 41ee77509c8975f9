#include "multiflow/core.hpp"

#include <cmath>
#include <cstdio>

namespace multiflow {

MultiTime::MultiTime(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) {
    throw DimensionError("multitime must have at least one coordinate");
  }
  for (double c : coords_) {
    if (!std::isfinite(c)) {
      throw InvalidArgument("multitime coordinates must be finite");
    }
  }
}

MultiTime::MultiTime(std::initializer_list<double> coords)
    : MultiTime(std::vector<double>(coords)) {}

MultiTime MultiTime::zeros(std::size_t m) {
  return MultiTime(std::vector<double>(m, 0.0));
}

MultiTime MultiTime::from_vector(const Vector& v) {
  return MultiTime(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector MultiTime::to_vector() const {
  return Eigen::Map<const Vector>(coords_.data(),
                                  static_cast<Eigen::Index>(coords_.size()));
}

Vector MultiTime::minus(const MultiTime& origin) const {
  require_same_dim(*this, origin);
  return to_vector() - origin.to_vector();
}

std::string MultiTime::to_string() const {
  std::string out = "(";
  char buf[32];
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g", coords_[i]);
    if (i) out += ", ";
    out += buf;
  }
  return out + ")";
}

void require_same_dim(const MultiTime& a, const MultiTime& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("multitime dimension mismatch: " +
                         std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
  }
}

MultiTime lerp(const MultiTime& a, const MultiTime& b, double tau) {
  require_same_dim(a, b);
  std::vector<double> c(a.dim());
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = (1.0 - tau) * a[i] + tau * b[i];
  }
  return MultiTime(std::move(c));
}

PolylineCurve::PolylineCurve(std::vector<MultiTime> waypoints)
    : waypoints_(std::move(waypoints)) {
  if (waypoints_.size() < 2) {
    throw InvalidArgument("a polyline needs at least two waypoints");
  }
  for (const auto& w : waypoints_) require_same_dim(waypoints_.front(), w);
}

PolylineCurve PolylineCurve::segment(const MultiTime& from,
                                     const MultiTime& to) {
  require_same_dim(from, to);
  return PolylineCurve({from, to});
}

PolylineCurve PolylineCurve::staircase(const MultiTime& from,
                                       const MultiTime& to) {
  require_same_dim(from, to);
  std::vector<MultiTime> pts{from};
  std::vector<double> corner(from.coords().begin(), from.coords().end());
  for (std::size_t alpha = 0; alpha < from.dim(); ++alpha) {
    if (corner[alpha] == to[alpha]) continue;
    corner[alpha] = to[alpha];
    pts.emplace_back(corner);
  }
  // Keep exact endpoint and at least two waypoints.
  if (pts.size() == 1) pts.push_back(to);
  pts.back() = to;
  return PolylineCurve(std::move(pts));
}

std::size_t PolylineCurve::segment_at(double tau) const {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw InvalidArgument("curve parameter must lie in [0, 1]");
  }
  const std::size_t s = segment_count();
  auto idx = static_cast<std::size_t>(tau * static_cast<double>(s));
  return idx >= s ? s - 1 : idx;
}

MultiTime PolylineCurve::eval(double tau) const {
  const std::size_t i = segment_at(tau);
  if (tau == 1.0) return waypoints_.back();
  const double s = static_cast<double>(segment_count());
  const double local = tau * s - static_cast<double>(i);
  if (local == 0.0) return waypoints_[i];
  return lerp(waypoints_[i], waypoints_[i + 1], local);
}

Vector PolylineCurve::velocity(double tau) const {
  const std::size_t i = segment_at(tau);
  return static_cast<double>(segment_count()) *
         waypoints_[i + 1].minus(waypoints_[i]);
}

PolylineCurve PolylineCurve::reversed() const {
  return PolylineCurve(
      std::vector<MultiTime>(waypoints_.rbegin(), waypoints_.rend()));
}

PolylineCurve PolylineCurve::then(const PolylineCurve& next) const {
  if (!(back() == next.front())) {
    throw InvalidArgument("concatenated curves must share the junction point");
  }
  std::vector<MultiTime> pts = waypoints_;
  pts.insert(pts.end(), next.waypoints_.begin() + 1, next.waypoints_.end());
  return PolylineCurve(std::move(pts));
}

void NumericConfig::validate() const {
  if (quad_points_per_segment == 0 || ode_steps_per_segment == 0 ||
      grid_samples_per_axis == 0) {
    throw InvalidArgument("numeric counts must be positive");
  }
  if (!(rank_rel_tol > 0.0) || !(residual_rel_tol > 0.0)) {
    throw InvalidArgument("numeric tolerances must be strictly positive");
  }
}

}  // namespace multiflow
