#pragma once

#include "lc/edge_tracker.hpp"
#include "lc/trust_log.hpp"
#include "lc/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace lc {

struct NormalCircle {
  int id = 0;
  PixelPoint center = PixelPoint::Zero();
  double radius = 12.5;
  double trust = 2.5;
  double angle = 0.0;
  double speed = 0.0;
};

struct RebelCircle {
  int id = 0;
  PixelPoint center = PixelPoint::Zero();
  double radius = 12.5;
  double trust = 2.5;
  double angle = 0.0;
  double speed = 0.0;
  double deviation_level = 0.0;
};

// Ordinary: sum / M. Literal: sum / (M + 1), the biased form as printed.
enum class MeanRule { Ordinary, Literal };

// Windows used for grouping edges and for comparing a group with a circle.
struct CircleParams {
  TrustThresholds trust;
  double initial_boundary = 25.0;  // BS_0
  // Normal edges: grouping, then group-versus-circle comparison.
  double eps_beta_group = 20.0;
  double eps_v_group = 10.0;
  double eps_beta_match = 4.0;
  double eps_v_match = 100.0;
  // Rebel edges: grouping, then group-versus-circle comparison.
  double eps_beta_rebel_group = 50.0;
  double eps_v_rebel_group = 40.0;
  double eps_beta_rebel_match = 10.0;
  double eps_v_rebel_match = 1000.0;
  double involvement = 0.5;  // fraction of group edges that must fall inside the circle
  int psi_lifetime = 3;      // frames an ignore region stays active
  MeanRule mean_rule = MeanRule::Ordinary;

  double spatial_reach() const { return 2.0 * initial_boundary; }
  double min_radius() const { return 0.5 * initial_boundary; }
};

// A group is a list of indices into the edge list it was built from.
using EdgeIndexGroup = std::vector<std::size_t>;

// Angles are unwrapped relative to the first entry before summing; the result
// is wrapped to [0, 360). The speed mean is of the absolute sum.
double group_mean_angle(std::span<const double> angles, MeanRule rule = MeanRule::Ordinary);
double group_mean_value(std::span<const double> values, MeanRule rule = MeanRule::Ordinary);

std::vector<EdgeIndexGroup> group_normal_edges(std::span<const NormalEdge> edges, double eps_beta,
                                               double eps_v, const EgoState& ego, double spatial_reach);

std::vector<EdgeIndexGroup> group_rebel_edges(std::span<const RebelEdge> edges, double eps_beta,
                                              double eps_v, const EgoState& ego, double spatial_reach);

enum class CircleMatch { NoMatch, Aligned, Deviated };

struct MatchResult {
  CircleMatch kind = CircleMatch::NoMatch;
  double involvement = 0.0;
};

double involvement_fraction(std::span<const PixelPoint> locations, const PixelPoint& center, double radius);

MatchResult match_normal_circle(std::span<const NormalEdge> group, const NormalCircle& circle,
                                double eps_beta, double eps_v, double pct_cte,
                                MeanRule rule = MeanRule::Ordinary);

MatchResult match_rebel_circle(std::span<const RebelEdge> group, const RebelCircle& circle,
                               double eps_beta, double eps_v, const EgoState& ego, double pct_cte,
                               MeanRule rule = MeanRule::Ordinary);

NormalCircle update_normal_circle(const NormalCircle& circle, std::span<const NormalEdge> group,
                                  CircleMatch match, const CircleParams& params);

RebelCircle update_rebel_circle(const RebelCircle& circle, std::span<const RebelEdge> group,
                                CircleMatch match, const CircleParams& params);

NormalCircle seed_normal_circle(std::span<const NormalEdge> group, const CircleParams& params);
RebelCircle seed_rebel_circle(std::span<const RebelEdge> group, const CircleParams& params);

struct CircleTrackerState {
  std::vector<NormalCircle> normals;
  std::vector<RebelCircle> rebels;
  int next_id = 1;
};

struct Feedback {
  std::vector<IgnoreRegion> regions;
  std::vector<Collector> collectors;
};

// Maximally trusted normal circles become circular ignore regions and drop back
// to Tr_s; every circle contributes one collector.
Feedback emit_feedback(CircleTrackerState& circles, const CircleParams& params, int frame_id,
                       TrustLog* log = nullptr);

struct CircleStepReport {
  std::size_t created_normals = 0;
  std::size_t created_rebels = 0;
  std::size_t emitted_regions = 0;
};

// Normal circles are matched against normal-edge groups, rebel circles against
// rebel-edge groups, and the feedback is emitted last.
Feedback step_circle_tracker(CircleTrackerState& state, std::span<const NormalEdge> normal_edges,
                             std::span<const RebelEdge> rebel_edges, const EgoState& ego,
                             const CircleParams& params, int frame_id, TrustLog* log = nullptr,
                             CircleStepReport* report = nullptr, std::span<const IgnoreRegion> ignored = {});

}  // namespace lc
