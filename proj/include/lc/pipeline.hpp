#pragma once

#include "lc/circle_tracker.hpp"
#include "lc/edge_tracker.hpp"
#include "lc/line_expert.hpp"
#include "lc/simulator.hpp"
#include "lc/trust_log.hpp"
#include "lc/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lc {

struct RunConfig {
  TrustThresholds trust;
  double error_span = 4.0;          // delta, pixels
  double initial_boundary = 25.0;   // BL_0 = BS_0, pixels
  double rebel_radius = 25.0;
  double rebel_max_deviation = 50.0;
  int fast_threshold = 25;
  bool fast_nonmax = true;
  // Grouping of normal edges, and comparison of a normal group with a circle.
  double eps_beta_group = 20.0;
  double eps_v_group = 10.0;
  double eps_beta_match = 4.0;
  double eps_v_match = 100.0;
  // Same pair for rebel edges.
  double eps_beta_rebel_group = 50.0;
  double eps_v_rebel_group = 40.0;
  double eps_beta_rebel_match = 10.0;
  double eps_v_rebel_match = 1000.0;
  double involvement = 0.5;
  int psi_lifetime = 3;
  MeanRule mean_rule = MeanRule::Ordinary;
  double pixels_per_unit = kDefaultPixelsPerMeter;
  double frame_interval = 1.0;  // seconds, used for the first frame
  FrameGeometry frame;

  TrackerParams tracker_params() const;
  CircleParams circle_params() const;
  ErrorModel error_model() const;
  // Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

struct FilterState {
  EdgeTrackerState edges;
  CircleTrackerState circles;
  std::vector<Collector> collectors;
  std::vector<IgnoreRegion> regions;
  ErrorModel error;
  int frame_id = 0;  // last processed frame
  std::optional<double> last_timestamp;
};

struct FrameInput {
  int frame_id = 0;
  double timestamp = 0.0;
  std::vector<EdgePoint> edges;
  double ego_speed = 0.0;     // physical units / second
  double ego_distance = 0.0;  // physical units
};

struct FrameReport {
  int frame_id = 0;
  std::size_t raw_edges = 0;
  std::size_t culled = 0;
  std::size_t consumed = 0;
  std::size_t spawned = 0;
  std::size_t absorbed = 0;
  std::size_t rejected = 0;
  std::size_t n_normal_edges = 0;
  std::size_t n_rebel_edges = 0;
  std::size_t n_chains = 0;
  std::size_t n_normal_circles = 0;
  std::size_t n_rebel_circles = 0;
  std::size_t n_regions = 0;
  std::size_t n_collectors = 0;
  std::size_t promoted = 0;
  std::size_t emitted_regions = 0;
  long dimensionality = 0;
  long spawn_allowance = 0;  // dimensionality contributed by entities created this frame
  std::vector<char> culled_mask;  // per raw edge

  std::size_t processed() const { return raw_edges - culled; }
};

// Per-entity scalar layout: E_n 6, E_r 9, C_n 6, C_r 7, psi 5, lambda 3.
long compute_dimensionality(const FilterState& state);

// One full pass of the filter loop: Line expert, edge estimation, circle
// estimation, feedback.
FrameReport process_frame(FilterState& state, const FrameInput& input, const RunConfig& config,
                          TrustLog* log = nullptr);

FrameInput to_frame_input(const SimFrame& frame);

// Checkpointing.
std::string serialize_state(const FilterState& state);
FilterState deserialize_state(const std::string& text);

}  // namespace lc
