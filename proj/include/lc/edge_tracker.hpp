#pragma once

#include "lc/line_expert.hpp"
#include "lc/trust_log.hpp"
#include "lc/types.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

namespace lc {

// Tracked landmark following the radial flow (E_n entry).
struct NormalEdge {
  int id = 0;
  PixelPoint location = PixelPoint::Zero();
  double boundary_layer = 25.0;
  double trust = 2.5;
  double angle = 0.0;  // radial angle from the frame center, degrees
  double speed = 0.0;  // pixels / second
  int observation = -1;  // raw-frame index of the edge consumed this frame, -1 when coasting
};

// Landmark violating the radial flow (E_r entry).
struct RebelEdge {
  int id = 0;
  PixelPoint location = PixelPoint::Zero();
  double trust = 2.5;
  double angle = 0.0;            // bearing of location from origin, degrees
  double speed = 0.0;            // pixels / second
  double deviation_level = 0.0;  // per-frame bearing drift, degrees
  PixelPoint origin = PixelPoint::Zero();
  double boundary_layer = 25.0;
  int observation = -1;
};

// Three-frame rebel validation chain (alpha state).
struct RebelCandidateChain {
  int id = 0;
  std::array<PixelPoint, 3> points{PixelPoint::Zero(), PixelPoint::Zero(), PixelPoint::Zero()};
  int frames_checked = 0;  // number of valid entries in `points`
  int observation = -1;

  const PixelPoint& last() const { return points[static_cast<std::size_t>(frames_checked - 1)]; }
};

enum class Classification { Lambda1 = 1, Lambda2 = 2, Lambda3 = 3, Lambda4 = 4, Lambda5 = 5 };

// {-1, +1, -1, 0, -1}
double trust_delta(Classification c);
TrustEvent to_event(Classification c);

struct TrackerParams {
  TrustThresholds trust;
  double initial_boundary = 25.0;  // BL_0 = BS_0
  double rebel_radius = 25.0;      // detection constant for rebel edges
  double eps_beta = 20.0;          // angle consistency window, degrees
  double eps_v = 10.0;             // speed consistency, multiple of ego speed
  double rebel_max_deviation = 50.0;  // allowed direction change along a rebel chain, degrees
};

NormalEdge predict_normal_edge(const NormalEdge& edge, const EgoState& ego, const FrameGeometry& frame);

RebelEdge predict_rebel_edge(const RebelEdge& edge, const EgoState& ego);

// Gate radius of the predicted boundary layer, inflated by the error span.
double match_gate(const NormalEdge& predicted, const ErrorModel& error_model);

Classification classify(const PixelPoint& observation, const NormalEdge& predicted,
                        const NormalEdge& previous, const ErrorModel& error_model,
                        const FrameGeometry& frame, double eps_beta, double eps_v,
                        const EgoState& ego, double rebel_radius = 25.0);

// Trust-weighted location / speed / boundary-layer update for a lambda2 or lambda3 match.
NormalEdge update_normal_edge(const NormalEdge& previous, const NormalEdge& predicted,
                              const PixelPoint& observation, const EgoState& ego,
                              const FrameGeometry& frame, std::size_t group_correlation,
                              Classification classification, const TrustThresholds& trust);

struct ChainContinue {
  RebelCandidateChain chain;
};
struct ChainPromote {
  RebelEdge rebel;
};
struct ChainDiscard {};

using ChainStep = std::variant<ChainContinue, ChainPromote, ChainDiscard>;

ChainStep advance_rebel_chain(const RebelCandidateChain& chain,
                              const std::optional<PixelPoint>& observation, double max_deviation,
                              double error_span, const EgoState& ego, const TrackerParams& params);

RebelEdge update_rebel_edge(const RebelEdge& previous, const RebelEdge& predicted,
                            const PixelPoint& observation, const EgoState& ego,
                            const TrustThresholds& trust);

struct EdgeTrackerState {
  std::vector<NormalEdge> normals;
  std::vector<RebelEdge> rebels;
  std::vector<RebelCandidateChain> chains;
  int next_id = 1;
};

// Where every edge handed over by the Line expert ended up this frame.
struct EdgeStepReport {
  std::size_t consumed = 0;   // matched by an E_n (lambda2/3) or E_r
  std::size_t spawned = 0;    // became a new E_n
  std::size_t absorbed = 0;   // taken into a rebel chain
  std::size_t rejected = 0;   // sat exactly on the frame center
  std::size_t promoted = 0;   // chains promoted to E_r
  std::size_t created_entities = 0;
  std::vector<Classification> classifications;  // one entry per lambda outcome, for diagnostics
};

EdgeStepReport step_edge_tracker(const GroupedEdges& grouped, EdgeTrackerState& state,
                                 const EgoState& ego, const ErrorModel& error_model,
                                 const FrameGeometry& frame, const TrackerParams& params,
                                 int frame_id, TrustLog* log = nullptr,
                                 std::span<const IgnoreRegion> ignored = {});

}  // namespace lc
