#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace lc {

// Image-plane points: x rightward, y downward, origin at the top-left pixel.
template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

using PixelPoint = Point2<double>;
using Vector2d = Eigen::Vector2d;
using Vector3d = Eigen::Vector3d;

class GeometryError : public std::runtime_error {
public:
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

struct FrameGeometry {
  int width = 640;
  int height = 480;

  PixelPoint center() const { return PixelPoint(width / 2.0, height / 2.0); }

  bool contains(const PixelPoint& p) const {
    return p.x() >= 0.0 && p.y() >= 0.0 && p.x() < width && p.y() < height;
  }
};

struct EdgePoint {
  PixelPoint location = PixelPoint::Zero();
  int frame_id = 0;
  double timestamp = 0.0;
};

struct TrustThresholds {
  double standard = 3.0;  // Tr_s
  double critical = 2.0;  // Tr_cr
  double maximum = 5.0;   // Tr_max

  // Every newly created edge or circle starts here.
  double initial() const { return 0.5 * (critical + standard); }

  double clamp(double value) const { return value > maximum ? maximum : value; }

  bool survives(double value) const { return value >= critical; }

  bool valid() const { return critical < standard && standard < maximum; }
};

enum class RegionType : int { None = 0, Circle = 1, Rectangle = 2 };

struct IgnoreRegion {
  PixelPoint location = PixelPoint::Zero();
  // Circle: extent.x() is the radius. Rectangle: half-extents along x and y.
  Vector2d extent = Vector2d::Zero();
  RegionType type = RegionType::None;
  int expires_at_frame = 0;

  static IgnoreRegion circle(const PixelPoint& c, double radius, int expires_at) {
    return {c, Vector2d(radius, radius), RegionType::Circle, expires_at};
  }
  static IgnoreRegion rectangle(const PixelPoint& c, const Vector2d& half, int expires_at) {
    return {c, half, RegionType::Rectangle, expires_at};
  }

  bool active_at(int frame_id) const { return expires_at_frame >= frame_id; }
};

struct Collector {
  PixelPoint location = PixelPoint::Zero();
  double boundary_size = 25.0;
};

struct ErrorModel {
  double rotational_span = 4.0;  // pixels
  // Per-axis residuals (y, z) accumulated from the tracker; diagnostic only.
  Vector2d governing_errors = Vector2d::Zero();
};

struct EgoState {
  double speed = 0.0;            // pixels / second
  double distance_traveled = 0.0;  // pixels, carried for logging only
  double frame_interval = 1.0;   // seconds
};

}  // namespace lc
