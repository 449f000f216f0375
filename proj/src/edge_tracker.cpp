#include "lc/edge_tracker.hpp"

#include "lc/detail/grid_index.hpp"
#include "lc/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lc {

double trust_delta(Classification c) {
  switch (c) {
    case Classification::Lambda1: return -1.0;
    case Classification::Lambda2: return 1.0;
    case Classification::Lambda3: return -1.0;
    case Classification::Lambda4: return 0.0;
    case Classification::Lambda5: return -1.0;
  }
  return 0.0;
}

TrustEvent to_event(Classification c) {
  switch (c) {
    case Classification::Lambda1: return TrustEvent::Lambda1;
    case Classification::Lambda2: return TrustEvent::Lambda2;
    case Classification::Lambda3: return TrustEvent::Lambda3;
    case Classification::Lambda4: return TrustEvent::Lambda4;
    case Classification::Lambda5: return TrustEvent::Lambda5;
  }
  return TrustEvent::Coast;
}

NormalEdge predict_normal_edge(const NormalEdge& edge, const EgoState& ego, const FrameGeometry& frame) {
  const PixelPoint radial = edge.location - frame.center();
  const double r = radial.norm();
  if (r == 0.0) throw GeometryError("predict_normal_edge: edge sits on the frame center");
  NormalEdge out = edge;
  out.speed = 0.5 * (edge.speed + ego.speed);
  out.location = edge.location + out.speed * ego.frame_interval * (radial / r);
  out.observation = -1;
  return out;
}

RebelEdge predict_rebel_edge(const RebelEdge& edge, const EgoState& ego) {
  RebelEdge out = edge;
  out.location = edge.location +
                 edge.speed * ego.frame_interval * unit_from_degrees(edge.angle + edge.deviation_level);
  out.observation = -1;
  return out;
}

double match_gate(const NormalEdge& predicted, const ErrorModel& error_model) {
  return predicted.boundary_layer + error_model.rotational_span;
}

Classification classify(const PixelPoint& observation, const NormalEdge& predicted,
                        const NormalEdge& previous, const ErrorModel& error_model,
                        const FrameGeometry& frame, double eps_beta, double eps_v,
                        const EgoState& ego, double rebel_radius) {
  const PixelPoint c = frame.center();
  const PixelPoint ray = previous.location - c;
  const PixelPoint rel = observation - c;

  const bool in_gate = (observation - predicted.location).norm() <= match_gate(predicted, error_model);
  const bool same_side = rel.dot(ray) > 0.0;
  const bool in_span =
      same_side && error_span_distance(observation, previous.location, c) < error_model.rotational_span;

  bool consistent = rel.squaredNorm() > 0.0;
  if (consistent) {
    consistent = within_angle_window(radial_angle(observation, c), previous.angle, eps_beta);
    const double implied_speed = (observation - previous.location).norm() / ego.frame_interval;
    consistent = consistent && implied_speed <= eps_v * ego.speed;
    // Static structure only streams outward under forward motion.
    const double outward = (observation - previous.location).dot(ray.normalized());
    consistent = consistent && outward >= -error_model.rotational_span;
  }

  if (in_gate && in_span) return consistent ? Classification::Lambda2 : Classification::Lambda3;
  if (in_span) return Classification::Lambda1;
  const double reach = std::max(previous.boundary_layer, rebel_radius);
  if ((observation - previous.location).norm() <= reach) return Classification::Lambda5;
  return Classification::Lambda4;
}

NormalEdge update_normal_edge(const NormalEdge& previous, const NormalEdge& predicted,
                              const PixelPoint& observation, const EgoState& ego,
                              const FrameGeometry& frame, std::size_t group_correlation,
                              Classification classification, const TrustThresholds& trust) {
  if (group_correlation == 0) throw std::invalid_argument("update_normal_edge: group correlation must be >= 1");
  const PixelPoint c = frame.center();

  NormalEdge out = previous;
  out.location = trust_blend(predicted.location, observation, previous.trust, trust.critical);

  const double residual = (predicted.location - observation).norm() / ego.frame_interval;
  const bool outward = (observation - c).norm() > (predicted.location - c).norm();
  out.speed = std::abs(outward ? ego.speed + residual : ego.speed - residual);

  out.boundary_layer = 0.5 * (std::abs(ego.speed - predicted.speed) / static_cast<double>(group_correlation) +
                              previous.boundary_layer);
  out.trust = trust.clamp(previous.trust + trust_delta(classification));
  return out;
}

namespace {

double segment_angle(const PixelPoint& from, const PixelPoint& to) { return radial_angle(to, from); }

RebelEdge promote(const RebelCandidateChain& chain, const EgoState& ego, const TrackerParams& params) {
  const PixelPoint& l1 = chain.points[0];
  const PixelPoint& l2 = chain.points[1];
  const PixelPoint& l3 = chain.points[2];
  RebelEdge r;
  r.location = l3;
  r.origin = l1;
  const bool has31 = (l3 - l1).squaredNorm() > 0.0;
  const bool has21 = (l2 - l1).squaredNorm() > 0.0;
  r.angle = has31 ? segment_angle(l1, l3) : (has21 ? segment_angle(l1, l2) : 0.0);
  r.deviation_level = (has31 && has21) ? angle_difference(segment_angle(l1, l3), segment_angle(l1, l2)) : 0.0;
  r.speed = (l3 - l2).norm() / ego.frame_interval;
  r.trust = params.trust.initial();
  r.boundary_layer = params.rebel_radius;
  r.observation = chain.observation;
  return r;
}

}  // namespace

ChainStep advance_rebel_chain(const RebelCandidateChain& chain,
                              const std::optional<PixelPoint>& observation, double max_deviation,
                              double error_span, const EgoState& ego, const TrackerParams& params) {
  if (!observation) return ChainDiscard{};
  if (chain.frames_checked >= 3) return ChainDiscard{};

  RebelCandidateChain next = chain;
  const PixelPoint& obs = *observation;

  if (chain.frames_checked == 0) {
    next.points[0] = obs;
    next.frames_checked = 1;
    return ChainContinue{next};
  }
  if (chain.frames_checked == 1) {
    if ((obs - chain.points[0]).norm() > params.rebel_radius) return ChainDiscard{};
    next.points[1] = obs;
    next.frames_checked = 2;
    return ChainContinue{next};
  }

  const PixelPoint step1 = chain.points[1] - chain.points[0];
  const PixelPoint step2 = obs - chain.points[1];
  const bool short1 = step1.norm() <= error_span;
  const bool short2 = step2.norm() <= error_span;
  bool admissible = false;
  if (short1 || short2) {
    admissible = short1 && short2;
  } else {
    admissible = std::abs(angle_difference(segment_angle(chain.points[1], obs),
                                           segment_angle(chain.points[0], chain.points[1]))) <= max_deviation;
  }
  if (!admissible) return ChainDiscard{};

  next.points[2] = obs;
  next.frames_checked = 3;
  return ChainPromote{promote(next, ego, params)};
}

RebelEdge update_rebel_edge(const RebelEdge& previous, const RebelEdge& predicted,
                            const PixelPoint& observation, const EgoState& ego,
                            const TrustThresholds& trust) {
  RebelEdge out = previous;
  const double bearing = (observation - previous.origin).squaredNorm() > 0.0
                             ? radial_angle(observation, previous.origin)
                             : previous.angle;
  const double step = angle_difference(bearing, previous.angle);
  out.deviation_level = angle_difference(previous.deviation_level - (step - previous.deviation_level), 0.0);
  out.angle = bearing;
  out.location = trust_blend(predicted.location, observation, previous.trust, trust.critical);
  const double observed_speed = (observation - previous.location).norm() / ego.frame_interval;
  out.speed = trust_blend(previous.speed, observed_speed, previous.trust, trust.critical);
  out.trust = trust.clamp(previous.trust + 1.0);
  return out;
}

namespace {

void record(TrustLog* log, int frame_id, EntityKind kind, int id, TrustEvent event, double delta,
            double trust_after) {
  if (log) log->push_back(TrustRecord{frame_id, kind, id, event, delta, trust_after});
}

template <typename T>
std::vector<std::size_t> trust_order(const std::vector<T>& items) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (items[a].trust != items[b].trust) return items[a].trust > items[b].trust;
    return items[a].id < items[b].id;
  });
  return order;
}

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

}  // namespace

EdgeStepReport step_edge_tracker(const GroupedEdges& grouped, EdgeTrackerState& state,
                                 const EgoState& ego, const ErrorModel& error_model,
                                 const FrameGeometry& frame, const TrackerParams& params,
                                 int frame_id, TrustLog* log, std::span<const IgnoreRegion> ignored) {
  EdgeStepReport report;
  const auto& edges = grouped.edges;
  const PixelPoint center = frame.center();
  const double delta_span = error_model.rotational_span;
  std::vector<char> taken(edges.size(), 0);
  const detail::GridIndex index(edges, 32.0);

  auto nearest_untaken = [&](const PixelPoint& at, double radius) -> std::size_t {
    std::size_t best = kNone;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j : index.query(at, radius)) {
      if (taken[j]) continue;
      const double d = (edges[j].location - at).norm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    return best;
  };

  auto& normals = state.normals;
  std::vector<NormalEdge> predicted;
  predicted.reserve(normals.size());
  for (const auto& e : normals) predicted.push_back(predict_normal_edge(e, ego, frame));
  const auto order = trust_order(normals);
  std::vector<char> matched(normals.size(), 0);

  // Rebel tracks predict along their bearing and claim edges inside their boundary layer.
  auto& rebels = state.rebels;
  std::vector<RebelEdge> rebel_pred;
  rebel_pred.reserve(rebels.size());
  for (const auto& r : rebels) rebel_pred.push_back(predict_rebel_edge(r, ego));
  const auto rebel_order = trust_order(rebels);
  std::vector<char> rebel_matched(rebels.size(), 0);

  // Every lambda2 pair and every rebel claim is settled globally nearest first,
  // then the lambda3 pairs the same way.
  struct Pair {
    double distance;
    bool rebel;
    std::size_t rank;  // position in trust order
    std::size_t track;
    std::size_t edge;
  };
  std::vector<Pair> pairs[2];
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const std::size_t i = order[rank];
    const NormalEdge& prev = normals[i];
    const NormalEdge& pred = predicted[i];
    for (std::size_t j : index.query(pred.location, match_gate(pred, error_model))) {
      const auto c = classify(edges[j].location, pred, prev, error_model, frame, params.eps_beta,
                              params.eps_v, ego, params.rebel_radius);
      if (c != Classification::Lambda2 && c != Classification::Lambda3) continue;
      pairs[c == Classification::Lambda2 ? 0 : 1].push_back(
          {(edges[j].location - pred.location).norm(), false, rank, i, j});
    }
  }
  for (std::size_t rank = 0; rank < rebel_order.size(); ++rank) {
    const std::size_t i = rebel_order[rank];
    for (std::size_t j : index.query(rebel_pred[i].location, rebels[i].boundary_layer)) {
      pairs[0].push_back({(edges[j].location - rebel_pred[i].location).norm(), true, rank, i, j});
    }
  }

  auto take_rebel = [&](std::size_t i, std::size_t j) {
    RebelEdge& r = rebels[i];
    RebelEdge next = update_rebel_edge(r, rebel_pred[i], edges[j].location, ego, params.trust);
    // The deviation update doubles any residual drift of a straight track. A
    // point moving V*t_f at range r from its origin cannot turn its bearing by
    // more than asin(V*t_f/r) in one frame, and never past the chain corridor.
    const double range = (next.location - next.origin).norm();
    const double reach = next.speed * ego.frame_interval;
    const double turn = range > reach ? std::asin(reach / range) * kRadToDeg<double> : 90.0;
    const double bound = std::min(turn, params.rebel_max_deviation);
    next.deviation_level = std::clamp(next.deviation_level, -bound, bound);
    next.observation = static_cast<int>(grouped.source_index[j]);
    record(log, frame_id, EntityKind::RebelEdge, r.id, TrustEvent::RebelMatch, 1.0, next.trust);
    r = next;
    taken[j] = 1;
    rebel_matched[i] = 1;
    ++report.consumed;
  };

  for (int slot = 0; slot < 2; ++slot) {
    auto& list = pairs[slot];
    std::sort(list.begin(), list.end(), [](const Pair& a, const Pair& b) {
      if (a.distance != b.distance) return a.distance < b.distance;
      if (a.rebel != b.rebel) return a.rebel;
      if (a.rank != b.rank) return a.rank < b.rank;
      return a.edge < b.edge;
    });
    const Classification cls = slot == 0 ? Classification::Lambda2 : Classification::Lambda3;
    for (const Pair& p : list) {
      if (taken[p.edge]) continue;
      if (p.rebel) {
        if (!rebel_matched[p.track]) take_rebel(p.track, p.edge);
        continue;
      }
      if (matched[p.track]) continue;
      const NormalEdge& prev = normals[p.track];
      NormalEdge next = update_normal_edge(prev, predicted[p.track], edges[p.edge].location, ego, frame,
                                           std::max<std::size_t>(1, grouped.group_size_of(p.edge)), cls,
                                           params.trust);
      next.observation = static_cast<int>(grouped.source_index[p.edge]);
      record(log, frame_id, EntityKind::NormalEdge, prev.id, to_event(cls), trust_delta(cls), next.trust);
      report.classifications.push_back(cls);
      normals[p.track] = next;
      taken[p.edge] = 1;
      matched[p.track] = 1;
      ++report.consumed;
    }
  }

  for (std::size_t i : rebel_order) {
    if (rebel_matched[i]) continue;
    const std::size_t j = nearest_untaken(rebel_pred[i].location, rebels[i].boundary_layer);
    if (j != kNone) {
      take_rebel(i, j);
      continue;
    }
    RebelEdge next = rebel_pred[i];
    next.trust = rebels[i].trust - 1.0;
    record(log, frame_id, EntityKind::RebelEdge, rebels[i].id, TrustEvent::Coast, -1.0, next.trust);
    rebels[i] = next;
  }

  // Open rebel chains look for their next link around the straight-line extrapolation.
  std::vector<RebelCandidateChain> surviving_chains;
  for (const auto& chain : state.chains) {
    const PixelPoint expected = chain.frames_checked >= 2 ? PixelPoint(2.0 * chain.points[1] - chain.points[0])
                                                          : chain.last();
    const std::size_t j = nearest_untaken(expected, params.rebel_radius);
    std::optional<PixelPoint> obs;
    if (j != kNone) obs = edges[j].location;
    auto step = advance_rebel_chain(chain, obs, params.rebel_max_deviation, delta_span, ego, params);
    if (auto* cont = std::get_if<ChainContinue>(&step)) {
      cont->chain.observation = static_cast<int>(grouped.source_index[j]);
      surviving_chains.push_back(cont->chain);
      taken[j] = 1;
      ++report.absorbed;
    } else if (auto* prom = std::get_if<ChainPromote>(&step)) {
      RebelEdge r = prom->rebel;
      r.id = state.next_id++;
      r.observation = static_cast<int>(grouped.source_index[j]);
      record(log, frame_id, EntityKind::RebelEdge, r.id, TrustEvent::Created, 0.0, r.trust);
      state.rebels.push_back(r);
      taken[j] = 1;
      ++report.absorbed;
      ++report.promoted;
      ++report.created_entities;
    }
  }
  state.chains = std::move(surviving_chains);

  // Everything still unmatched: lambda1 spawns, lambda5 opens a chain, lambda4 leaves the edge alone.
  std::vector<NormalEdge> spawned;
  std::vector<char> released(normals.size(), 0);
  for (std::size_t i : order) {
    if (matched[i]) continue;
    const NormalEdge prev = normals[i];
    const NormalEdge& pred = predicted[i];
    // An unmatched edge predicted into an ignore region, or out of view, lost its
    // observation there and is no longer tracked. Both borders get the error span.
    const bool leaving = pred.location.x() < delta_span || pred.location.y() < delta_span ||
                         pred.location.x() > frame.width - delta_span || pred.location.y() > frame.height - delta_span;
    if (leaving || std::any_of(ignored.begin(), ignored.end(), [&](IgnoreRegion r) {
          r.extent.array() += delta_span;
          return inside_ignore_region(pred.location, r);
        })) {
      released[i] = 1;
      record(log, frame_id, EntityKind::NormalEdge, prev.id, TrustEvent::Released, 0.0, prev.trust);
      continue;
    }
    const double gate = match_gate(pred, error_model);
    const double reach = std::max(prev.boundary_layer, params.rebel_radius);
    const double radius = std::max(2.0 * gate, reach + (pred.location - prev.location).norm());

    std::size_t best = kNone;
    double best_d = std::numeric_limits<double>::infinity();
    Classification best_c = Classification::Lambda4;
    bool saw_candidate = false;
    for (std::size_t j : index.query(pred.location, radius)) {
      if (taken[j]) continue;
      const auto c = classify(edges[j].location, pred, prev, error_model, frame, params.eps_beta,
                              params.eps_v, ego, params.rebel_radius);
      if (c == Classification::Lambda1 && (edges[j].location - pred.location).norm() > 2.0 * gate) continue;
      saw_candidate = true;
      if (c != Classification::Lambda1 && c != Classification::Lambda5) continue;
      const double d = (edges[j].location - pred.location).norm();
      if (d < best_d) {
        best_d = d;
        best = j;
        best_c = c;
      }
    }

    NormalEdge next = pred;
    TrustEvent event = TrustEvent::Coast;
    double delta = -1.0;
    if (best != kNone) {
      event = to_event(best_c);
      delta = trust_delta(best_c);
      report.classifications.push_back(best_c);
      taken[best] = 1;
      const int source = static_cast<int>(grouped.source_index[best]);
      if (best_c == Classification::Lambda1) {
        NormalEdge fresh;
        fresh.location = edges[best].location;
        fresh.boundary_layer = params.initial_boundary;
        fresh.trust = params.trust.initial();
        fresh.angle = radial_angle(fresh.location, center);
        fresh.speed = ego.speed;
        fresh.observation = source;
        spawned.push_back(fresh);
        ++report.spawned;
      } else {
        RebelCandidateChain chain;
        chain.id = state.next_id++;
        chain.points[0] = prev.location;
        chain.points[1] = edges[best].location;
        chain.frames_checked = 2;
        chain.observation = source;
        state.chains.push_back(chain);
        ++report.absorbed;
      }
    } else if (saw_candidate) {
      event = TrustEvent::Lambda4;
      delta = 0.0;
      report.classifications.push_back(Classification::Lambda4);
    }
    next.trust = params.trust.clamp(prev.trust + delta);
    record(log, frame_id, EntityKind::NormalEdge, prev.id, event, delta, next.trust);
    normals[i] = next;
  }

  if (std::find(released.begin(), released.end(), 1) != released.end()) {
    std::vector<NormalEdge> kept;
    kept.reserve(normals.size());
    for (std::size_t i = 0; i < normals.size(); ++i) {
      if (!released[i]) kept.push_back(normals[i]);
    }
    normals = std::move(kept);
  }

  for (auto& fresh : spawned) {
    fresh.id = state.next_id++;
    record(log, frame_id, EntityKind::NormalEdge, fresh.id, TrustEvent::Created, 0.0, fresh.trust);
    normals.push_back(fresh);
    ++report.created_entities;
  }

  // Leftover edges become new normal edges seeded with the vehicle velocity.
  for (std::size_t j = 0; j < edges.size(); ++j) {
    if (taken[j]) continue;
    if ((edges[j].location - center).squaredNorm() == 0.0) {
      ++report.rejected;
      continue;
    }
    NormalEdge fresh;
    fresh.id = state.next_id++;
    fresh.location = edges[j].location;
    fresh.boundary_layer = params.initial_boundary;
    fresh.trust = params.trust.initial();
    fresh.angle = radial_angle(fresh.location, center);
    fresh.speed = ego.speed;
    fresh.observation = static_cast<int>(grouped.source_index[j]);
    record(log, frame_id, EntityKind::NormalEdge, fresh.id, TrustEvent::Created, 0.0, fresh.trust);
    normals.push_back(fresh);
    ++report.spawned;
    ++report.created_entities;
  }

  auto purge = [&](auto& items, EntityKind kind) {
    std::erase_if(items, [&](const auto& e) {
      if (params.trust.survives(e.trust)) return false;
      record(log, frame_id, kind, e.id, TrustEvent::Deleted, 0.0, e.trust);
      return true;
    });
  };
  purge(normals, EntityKind::NormalEdge);
  purge(state.rebels, EntityKind::RebelEdge);
  return report;
}

}  // namespace lc
