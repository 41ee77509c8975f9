#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "multiflow/error.hpp"

namespace multiflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A point t = (t^1, ..., t^m) of the multitime source space.
class MultiTime {
 public:
  explicit MultiTime(std::vector<double> coords);
  MultiTime(std::initializer_list<double> coords);

  static MultiTime zeros(std::size_t m);
  static MultiTime from_vector(const Vector& v);

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t alpha) const { return coords_[alpha]; }
  std::span<const double> coords() const { return coords_; }
  Vector to_vector() const;

  /// Componentwise difference `*this - origin`.
  Vector minus(const MultiTime& origin) const;

  std::string to_string() const;

  friend bool operator==(const MultiTime&, const MultiTime&) = default;

 private:
  std::vector<double> coords_;
};

/// (1 - tau) a + tau b.
MultiTime lerp(const MultiTime& a, const MultiTime& b, double tau);

void require_same_dim(const MultiTime& a, const MultiTime& b);

/// Piecewise-affine curve through a list of waypoints, parameterized on
/// [0, 1] with each of the S segments owning an interval of width 1/S.
class PolylineCurve {
 public:
  explicit PolylineCurve(std::vector<MultiTime> waypoints);

  /// Straight segment from `from` to `to`.
  static PolylineCurve segment(const MultiTime& from, const MultiTime& to);

  /// Axis-ordered staircase: moves along t^1 first, then t^2, ..., so the
  /// k-th corner is (to^1, ..., to^k, from^{k+1}, ..., from^m). Legs that
  /// do not move are dropped.
  static PolylineCurve staircase(const MultiTime& from, const MultiTime& to);

  std::size_t dim() const { return waypoints_.front().dim(); }
  std::size_t segment_count() const { return waypoints_.size() - 1; }
  const std::vector<MultiTime>& waypoints() const { return waypoints_; }
  const MultiTime& front() const { return waypoints_.front(); }
  const MultiTime& back() const { return waypoints_.back(); }

  MultiTime eval(double tau) const;

  /// d gamma / d tau. Constant on each segment; at an interior breakpoint the
  /// right-hand derivative is returned.
  Vector velocity(double tau) const;

  PolylineCurve reversed() const;

  /// This curve followed by `next`, which must start where this one ends.
  PolylineCurve then(const PolylineCurve& next) const;

 private:
  std::size_t segment_at(double tau) const;

  std::vector<MultiTime> waypoints_;
};

struct NumericConfig {
  std::size_t quad_points_per_segment = 16;
  std::size_t ode_steps_per_segment = 256;
  double rank_rel_tol = 1e-10;
  double residual_rel_tol = 1e-8;
  std::size_t grid_samples_per_axis = 5;

  /// Throws InvalidArgument unless every field is strictly positive.
  void validate() const;
};

/// Frobenius norm; the norm used for every residual in the library.
inline double frobenius(const Matrix& a) { return a.norm(); }

}  // namespace multiflow
