#include "lc/simulator.hpp"

#include "lc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lc {

std::optional<PixelPoint> project(const Vector3d& world, double camera_z, const FrameGeometry& frame,
                                  double focal) {
  const double z = world.z() - camera_z;
  if (z <= 0.0) return std::nullopt;
  const PixelPoint c = frame.center();
  const PixelPoint p(c.x() + focal * world.x() / z, c.y() + focal * world.y() / z);
  if (!frame.contains(p)) return std::nullopt;
  return p;
}

namespace {

struct Landmark {
  int id = 0;
  Vector3d position = Vector3d::Zero();
};

class Sampler {
public:
  explicit Sampler(const SimConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

  // Image position and depth of a new object.
  std::pair<PixelPoint, double> object() {
    std::uniform_real_distribution<double> ux(0.0, cfg_.frame.width);
    std::uniform_real_distribution<double> uy(0.0, cfg_.frame.height);
    std::uniform_real_distribution<double> ud(cfg_.min_depth, cfg_.max_depth);
    PixelPoint p;
    do {
      p = PixelPoint(ux(rng_), uy(rng_));
    } while (!admissible(p));
    return {p, ud(rng_)};
  }

  // A corner of the object at `anchor`. When the scatter keeps landing outside
  // the admissible area the corner goes somewhere else in the frame instead.
  Landmark spawn(const PixelPoint& anchor, double depth, double camera_z, bool first) {
    PixelPoint p = anchor;
    if (!first) {
      bool placed = false;
      std::normal_distribution<double> n(0.0, std::max(cfg_.cluster_spread, 1e-3));
      for (int tries = 0; tries < 16 && !placed; ++tries) {
        p = anchor + Vector2d(n(rng_), n(rng_));
        placed = admissible(p);
      }
      if (!placed) p = object().first;
    }
    const PixelPoint c = cfg_.frame.center();
    const Vector3d world((p.x() - c.x()) * depth / cfg_.focal_length, (p.y() - c.y()) * depth / cfg_.focal_length,
                         camera_z + depth);
    return {next_id_++, world};
  }

  double gaussian(double sigma) {
    if (sigma <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(rng_);
  }

private:
  bool admissible(const PixelPoint& p) const {
    return (p - cfg_.frame.center()).norm() >= cfg_.min_center_radius && cfg_.frame.contains(p);
  }

  const SimConfig& cfg_;
  std::mt19937_64 rng_;
  int next_id_ = 0;
};

// Fills `slots` of `landmarks` with fresh objects of up to cluster_size corners.
void respawn(Sampler& sampler, const SimConfig& cfg, std::vector<Landmark>& landmarks,
             const std::vector<std::size_t>& slots, double camera_z) {
  const std::size_t per = static_cast<std::size_t>(std::max(1, cfg.cluster_size));
  for (std::size_t i = 0; i < slots.size(); i += per) {
    const auto [anchor, depth] = sampler.object();
    for (std::size_t k = i; k < std::min(slots.size(), i + per); ++k) {
      landmarks[slots[k]] = sampler.spawn(anchor, depth, camera_z, k == i);
    }
  }
}

double camera_position(const SimConfig& cfg, double t) {
  return cfg.ego_speed * t + 0.5 * cfg.ego_acceleration * t * t;
}

}  // namespace

std::vector<SimFrame> generate_sequence(const SimConfig& config, const std::vector<WorldPoint>& moving_objects) {
  Sampler sampler(config);
  std::vector<Landmark> landmarks(static_cast<std::size_t>(std::max(0, config.landmark_count)));
  std::vector<std::size_t> all(landmarks.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  respawn(sampler, config, landmarks, all, 0.0);

  const double dt = config.frame_interval();
  const PixelPoint center = config.frame.center();
  std::vector<SimFrame> frames;
  frames.reserve(static_cast<std::size_t>(config.frame_count));

  for (int k = 0; k < config.frame_count; ++k) {
    const double t = k * dt;
    const double cz = camera_position(config, t);
    SimFrame f;
    f.frame_id = k + 1;
    f.timestamp = t;
    f.ego_speed = config.ego_speed + config.ego_acceleration * t;
    f.ego_distance = cz;
    f.ego = EgoState{f.ego_speed * config.pixels_per_meter, cz * config.pixels_per_meter, dt};

    const Vector2d shift(sampler.gaussian(config.rotational_error_sigma),
                         sampler.gaussian(config.rotational_error_sigma));
    auto emit = [&](const PixelPoint& clean, GroundTruth truth) {
      const PixelPoint noisy = clean + shift + Vector2d(sampler.gaussian(config.pixel_noise_sigma),
                                                         sampler.gaussian(config.pixel_noise_sigma));
      if (!config.frame.contains(noisy)) return;
      truth.clean = clean;
      f.edges.push_back(EdgePoint{noisy, f.frame_id, t});
      f.truth.push_back(truth);
    };

    std::vector<std::size_t> lost;
    for (std::size_t i = 0; i < landmarks.size(); ++i) {
      if (!project(landmarks[i].position, cz, config.frame, config.focal_length)) lost.push_back(i);
    }
    respawn(sampler, config, landmarks, lost, cz);
    for (const auto& lm : landmarks) {
      const auto p = project(lm.position, cz, config.frame, config.focal_length);
      if (p) emit(*p, GroundTruth{lm.id, EdgeLabel::Normal, *p});
    }

    const double noise_floor = std::max(0.5, 3.0 * config.pixel_noise_sigma);
    for (std::size_t m = 0; m < moving_objects.size(); ++m) {
      const auto& obj = moving_objects[m];
      const auto p = project(obj.at(t), cz, config.frame, config.focal_length);
      if (!p) continue;
      EdgeLabel label = EdgeLabel::Normal;
      // Compare against where the radial field would have carried the previous projection.
      const double prev_t = t - dt;
      const Vector3d prev_world = obj.at(prev_t);
      const double prev_z = prev_world.z() - camera_position(config, prev_t);
      if (prev_z > 0.0) {
        const PixelPoint prev(center.x() + config.focal_length * prev_world.x() / prev_z,
                              center.y() + config.focal_length * prev_world.y() / prev_z);
        if ((prev - center).squaredNorm() > 0.0) {
          const bool inward = (*p - center).norm() < (prev - center).norm() - noise_floor;
          if (error_span_distance(*p, prev, center) > noise_floor || inward) label = EdgeLabel::Rebel;
        }
      }
      emit(*p, GroundTruth{-static_cast<int>(m) - 1, label, *p});
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<WorldPoint> box_object(const Vector3d& center, double half_width, double half_height,
                                   const Vector3d& velocity) {
  std::vector<WorldPoint> out;
  for (double sy : {-1.0, 1.0}) {
    for (double sx : {-1.0, 1.0}) {
      out.push_back(WorldPoint::moving(center + Vector3d(sx * half_width, sy * half_height, 0.0), velocity));
    }
  }
  return out;
}

GrayImage render_frame(const SimFrame& frame, const FrameGeometry& geometry) {
  GrayImage img = GrayImage::Zero(geometry.height, geometry.width);
  for (const auto& e : frame.edges) {
    const int x = static_cast<int>(std::lround(e.location.x()));
    const int y = static_cast<int>(std::lround(e.location.y()));
    if (x < 0 || y < 0 || x >= geometry.width || y >= geometry.height) continue;
    img(y, x) = 255;
  }
  return img;
}

}  // namespace lc
