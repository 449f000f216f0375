#pragma once

#include "lc/fast.hpp"
#include "lc/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace lc {

// World frame: z forward along the optical axis, x right, y down. Meters.
struct WorldPoint {
  enum class Kind { Static, Moving };

  Vector3d position = Vector3d::Zero();
  Kind kind = Kind::Static;
  Vector3d velocity = Vector3d::Zero();  // meters / second, Moving only

  static WorldPoint moving(const Vector3d& p, const Vector3d& v) { return {p, Kind::Moving, v}; }

  Vector3d at(double t) const { return kind == Kind::Moving ? Vector3d(position + velocity * t) : position; }
};

inline constexpr double kDefaultPixelsPerMeter = 40.0;

struct SimConfig {
  int landmark_count = 1000;
  int frame_count = 30;
  double focal_length = 400.0;   // pixels
  double ego_speed = 0.05;       // meters / second
  double ego_acceleration = 0.0; // meters / second^2
  double frame_rate = 1.0;       // frames / second
  double pixel_noise_sigma = 0.0;
  double rotational_error_sigma = 0.0;
  std::uint64_t seed = 1;
  double min_depth = 4.0;        // meters ahead of the camera when a landmark is born
  double max_depth = 16.0;
  double min_center_radius = 30.0;  // landmarks are never born closer than this to the image center
  // Landmarks come in objects: cluster_size corners sharing one depth, scattered
  // around the object's image position with this sigma. 1 gives a uniform scene.
  int cluster_size = 8;
  double cluster_spread = 8.0;  // pixels
  double pixels_per_meter = kDefaultPixelsPerMeter;
  FrameGeometry frame;

  double frame_interval() const { return 1.0 / frame_rate; }
};

enum class EdgeLabel { Normal, Rebel };

struct GroundTruth {
  int landmark_id = 0;      // static landmarks count up from 0; moving objects are -1, -2, ...
  EdgeLabel label = EdgeLabel::Normal;
  PixelPoint clean = PixelPoint::Zero();  // noise-free projection
};

struct SimFrame {
  int frame_id = 0;
  double timestamp = 0.0;
  std::vector<EdgePoint> edges;
  std::vector<GroundTruth> truth;  // parallel to edges
  double ego_speed = 0.0;          // meters / second
  double ego_distance = 0.0;       // meters traveled since the first frame
  EgoState ego;                    // pixel units
};

std::optional<PixelPoint> project(const Vector3d& world, double camera_z, const FrameGeometry& frame,
                                  double focal);

// Deterministic in `config.seed`. Static landmarks that leave the view are
// replaced by fresh ones so the landmark count stays constant; replacements
// born in the same frame are clustered together.
std::vector<SimFrame> generate_sequence(const SimConfig& config, const std::vector<WorldPoint>& moving_objects);

// Rectangle of four corner points moving with a common velocity.
std::vector<WorldPoint> box_object(const Vector3d& center, double half_width, double half_height,
                                   const Vector3d& velocity);

// One bright pixel per edge on a black frame.
GrayImage render_frame(const SimFrame& frame, const FrameGeometry& geometry);

}  // namespace lc
