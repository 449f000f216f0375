#pragma once

#include "lc/types.hpp"

#include <cmath>
#include <numbers>

namespace lc {

template <typename Scalar>
constexpr Scalar kRadToDeg = Scalar(180) / std::numbers::pi_v<Scalar>;
template <typename Scalar>
constexpr Scalar kDegToRad = std::numbers::pi_v<Scalar> / Scalar(180);

// Wraps to [0, 360).
template <typename Scalar>
Scalar normalize_degrees(Scalar deg) {
  Scalar r = std::fmod(deg, Scalar(360));
  if (r < Scalar(0)) r += Scalar(360);
  if (r >= Scalar(360)) r -= Scalar(360);
  return r;
}

// Shortest signed circular difference a - b, in (-180, 180].
template <typename Scalar>
Scalar angle_difference(Scalar a, Scalar b) {
  Scalar d = normalize_degrees(a - b);
  return d > Scalar(180) ? d - Scalar(360) : d;
}

template <typename Scalar>
bool within_angle_window(Scalar angle, Scalar reference, Scalar eps) {
  return std::abs(angle_difference(angle, reference)) < eps;
}

template <typename Scalar>
Point2<Scalar> unit_from_degrees(Scalar deg) {
  return Point2<Scalar>(std::cos(deg * kDegToRad<Scalar>), std::sin(deg * kDegToRad<Scalar>));
}

// Collector membership: strict Euclidean test against the boundary size.
template <typename DerivedA, typename DerivedB, typename Scalar>
bool within_radius(const Eigen::MatrixBase<DerivedA>& p, const Eigen::MatrixBase<DerivedB>& center,
                   Scalar boundary) {
  return (center - p).norm() < boundary;
}

template <typename Derived>
bool within_collector(const Eigen::MatrixBase<Derived>& edge, const Collector& collector) {
  return within_radius(edge, collector.location, collector.boundary_size);
}

// Ty = 0 covers nothing; circles and rectangles are inclusive at the boundary.
template <typename Derived>
bool inside_ignore_region(const Eigen::MatrixBase<Derived>& edge, const IgnoreRegion& region) {
  switch (region.type) {
    case RegionType::Circle:
      return (edge - region.location).norm() <= region.extent.x();
    case RegionType::Rectangle: {
      const auto d = (edge - region.location).cwiseAbs();
      return d.x() <= region.extent.x() && d.y() <= region.extent.y();
    }
    case RegionType::None:
    default:
      return false;
  }
}

// Perpendicular pixel distance of `edge` from the radial line through the
// frame center and `tracked`:
//   |-(x - IC_x) + m (y - IC_y)| / sqrt(1 + m^2),  m = dx / dy of `tracked`.
// The slope is infinite for a horizontal ray; that case reduces to |y - IC_y|.
template <typename DerivedA, typename DerivedB, typename DerivedC>
typename DerivedA::Scalar error_span_distance(const Eigen::MatrixBase<DerivedA>& edge,
                                              const Eigen::MatrixBase<DerivedB>& tracked,
                                              const Eigen::MatrixBase<DerivedC>& center) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar tx = tracked.x() - center.x();
  const Scalar ty = tracked.y() - center.y();
  if (tx == Scalar(0) && ty == Scalar(0)) {
    throw GeometryError("error_span_distance: tracked location coincides with the frame center");
  }
  const Scalar ex = edge.x() - center.x();
  const Scalar ey = edge.y() - center.y();
  if (ty == Scalar(0)) return std::abs(ey);
  const Scalar m = tx / ty;
  return std::abs(-ex + m * ey) / std::sqrt(Scalar(1) + m * m);
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar error_span_distance(const Eigen::MatrixBase<DerivedA>& edge,
                                              const Eigen::MatrixBase<DerivedB>& tracked,
                                              const FrameGeometry& frame) {
  return error_span_distance(edge, tracked, frame.center().cast<typename DerivedA::Scalar>());
}

// Angle of (point - origin) in degrees, [0, 360), y pointing down.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar radial_angle(const Eigen::MatrixBase<DerivedA>& point,
                                       const Eigen::MatrixBase<DerivedB>& origin) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar dx = point.x() - origin.x();
  const Scalar dy = point.y() - origin.y();
  if (dx == Scalar(0) && dy == Scalar(0)) {
    throw GeometryError("radial_angle: point coincides with origin");
  }
  return normalize_degrees(std::atan2(dy, dx) * kRadToDeg<Scalar>);
}

// Trust-weighted blend used by every estimator in the filter:
//   [(Tr - Tr_cr) * prior + observed] / [(Tr - Tr_cr) + 1]
template <typename T>
T trust_blend(const T& prior, const T& observed, double trust, double critical) {
  const double w = trust - critical > 0.0 ? trust - critical : 0.0;
  return (w * prior + observed) / (w + 1.0);
}

inline double trust_blend_angle(double prior, double observed, double trust, double critical) {
  const double w = trust - critical > 0.0 ? trust - critical : 0.0;
  return normalize_degrees(prior + angle_difference(observed, prior) / (w + 1.0));
}

}  // namespace lc
