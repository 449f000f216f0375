#include "lc/circle_tracker.hpp"

#include "lc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lc {

namespace {

double denominator(std::size_t m, MeanRule rule) {
  return static_cast<double>(rule == MeanRule::Literal ? m + 1 : m);
}

}  // namespace

double group_mean_angle(std::span<const double> angles, MeanRule rule) {
  if (angles.empty()) return 0.0;
  const double ref = normalize_degrees(angles.front());
  double sum = 0.0;
  for (double a : angles) sum += ref + angle_difference(a, ref);
  return normalize_degrees(sum / denominator(angles.size(), rule));
}

double group_mean_value(std::span<const double> values, MeanRule rule) {
  if (values.empty()) return 0.0;
  const double sum = std::accumulate(values.begin(), values.end(), 0.0);
  return std::abs(sum) / denominator(values.size(), rule);
}

namespace {

template <typename Edge>
std::vector<std::size_t> by_trust(std::span<const Edge> edges) {
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (edges[a].trust != edges[b].trust) return edges[a].trust > edges[b].trust;
    return edges[a].id < edges[b].id;
  });
  return order;
}

// Greedy clustering: the most trusted unassigned edge is the reference and
// every unassigned edge passing `joins(ref, candidate)` within reach joins it.
template <typename Edge, typename Pred>
std::vector<EdgeIndexGroup> greedy_groups(std::span<const Edge> edges, double spatial_reach, Pred joins) {
  std::vector<EdgeIndexGroup> groups;
  const auto order = by_trust(edges);
  std::vector<char> assigned(edges.size(), 0);
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t r = order[oi];
    if (assigned[r]) continue;
    assigned[r] = 1;
    EdgeIndexGroup g{r};
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const std::size_t c = order[oj];
      if (assigned[c]) continue;
      if ((edges[c].location - edges[r].location).norm() > spatial_reach) continue;
      if (!joins(edges[r], edges[c])) continue;
      assigned[c] = 1;
      g.push_back(c);
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

// The group a circle is compared with: unassigned edges strictly inside the
// circle's collector boundary, filtered against the most trusted of them
// (ties: nearest to the center, then lowest id).
template <typename Edge, typename Pred>
EdgeIndexGroup group_around(std::span<const Edge> edges, const std::vector<char>& assigned, const PixelPoint& center,
                            double boundary, Pred joins) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!assigned[i] && (edges[i].location - center).norm() < boundary) pool.push_back(i);
  }
  if (pool.empty()) return {};
  auto better = [&](std::size_t a, std::size_t b) {
    if (edges[a].trust != edges[b].trust) return edges[a].trust > edges[b].trust;
    const double da = (edges[a].location - center).squaredNorm();
    const double db = (edges[b].location - center).squaredNorm();
    if (da != db) return da < db;
    return edges[a].id < edges[b].id;
  };
  const std::size_t ref = *std::min_element(pool.begin(), pool.end(), better);
  EdgeIndexGroup g{ref};
  for (std::size_t i : pool) {
    if (i != ref && joins(edges[ref], edges[i])) g.push_back(i);
  }
  return g;
}

template <typename Edge>
std::vector<PixelPoint> locations_of(std::span<const Edge> group) {
  std::vector<PixelPoint> out;
  out.reserve(group.size());
  for (const auto& e : group) out.push_back(e.location);
  return out;
}

template <typename Edge>
std::vector<double> speeds_of(std::span<const Edge> group) {
  std::vector<double> out;
  for (const auto& e : group) out.push_back(e.speed);
  return out;
}

PixelPoint centroid(std::span<const PixelPoint> pts) {
  PixelPoint sum = PixelPoint::Zero();
  for (const auto& p : pts) sum += p;
  return sum / static_cast<double>(pts.size());
}

double rms_distance(std::span<const PixelPoint> pts, const PixelPoint& center) {
  double acc = 0.0;
  for (const auto& p : pts) acc += (p - center).squaredNorm();
  return std::sqrt(acc / static_cast<double>(pts.size()));
}

std::vector<double> rebel_headings(std::span<const RebelEdge> group) {
  std::vector<double> out;
  for (const auto& e : group) out.push_back(e.angle + e.deviation_level);
  return out;
}

std::vector<double> rebel_deviations(std::span<const RebelEdge> group) {
  std::vector<double> out;
  for (const auto& e : group) out.push_back(e.deviation_level);
  return out;
}

double signed_group_mean(std::span<const double> values, MeanRule rule) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / denominator(values.size(), rule);
}

void record(TrustLog* log, int frame_id, EntityKind kind, int id, TrustEvent event, double delta, double after) {
  if (log) log->push_back(TrustRecord{frame_id, kind, id, event, delta, after});
}

}  // namespace

namespace {

auto normal_joins(double eps_beta, double eps_v, const EgoState& ego) {
  return [=](const NormalEdge& ref, const NormalEdge& e) {
    return within_angle_window(e.angle, ref.angle, eps_beta) && std::abs(e.speed) <= eps_v * ego.speed;
  };
}

auto rebel_joins(double eps_beta, double eps_v, const EgoState& ego) {
  return [=](const RebelEdge& ref, const RebelEdge& e) {
    return within_angle_window(e.angle, ref.angle, eps_beta) && std::abs(ref.speed) <= e.speed + eps_v * ego.speed;
  };
}

}  // namespace

std::vector<EdgeIndexGroup> group_normal_edges(std::span<const NormalEdge> edges, double eps_beta,
                                               double eps_v, const EgoState& ego, double spatial_reach) {
  return greedy_groups(edges, spatial_reach, normal_joins(eps_beta, eps_v, ego));
}

std::vector<EdgeIndexGroup> group_rebel_edges(std::span<const RebelEdge> edges, double eps_beta,
                                              double eps_v, const EgoState& ego, double spatial_reach) {
  return greedy_groups(edges, spatial_reach, rebel_joins(eps_beta, eps_v, ego));
}

double involvement_fraction(std::span<const PixelPoint> locations, const PixelPoint& center, double radius) {
  if (locations.empty()) return 0.0;
  std::size_t inside = 0;
  for (const auto& p : locations) {
    if ((p - center).norm() < radius) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(locations.size());
}

MatchResult match_normal_circle(std::span<const NormalEdge> group, const NormalCircle& circle,
                                double eps_beta, double eps_v, double pct_cte, MeanRule rule) {
  MatchResult out;
  const auto locs = locations_of(group);
  out.involvement = involvement_fraction(locs, circle.center, circle.radius);
  if (group.empty() || out.involvement < pct_cte) return out;

  std::vector<double> angles;
  for (const auto& e : group) angles.push_back(e.angle);
  const auto speeds = speeds_of(group);
  const bool aligned = within_angle_window(group_mean_angle(angles, rule), circle.angle, eps_beta) &&
                       group_mean_value(speeds, rule) <= eps_v * circle.speed;
  out.kind = aligned ? CircleMatch::Aligned : CircleMatch::Deviated;
  return out;
}

MatchResult match_rebel_circle(std::span<const RebelEdge> group, const RebelCircle& circle,
                               double eps_beta, double eps_v, const EgoState& ego, double pct_cte,
                               MeanRule rule) {
  MatchResult out;
  const auto locs = locations_of(group);
  out.involvement = involvement_fraction(locs, circle.center, circle.radius);
  if (group.empty() || out.involvement < pct_cte) return out;

  const auto headings = rebel_headings(group);
  const auto speeds = speeds_of(group);
  const bool aligned = within_angle_window(group_mean_angle(headings, rule), circle.angle, eps_beta) &&
                       group_mean_value(speeds, rule) <= circle.speed + eps_v * ego.speed;
  out.kind = aligned ? CircleMatch::Aligned : CircleMatch::Deviated;
  return out;
}

namespace {

template <typename Circle, typename Edge>
void blend_geometry(Circle& out, const Circle& circle, std::span<const Edge> group, const CircleParams& params) {
  const auto locs = locations_of(group);
  const double crit = params.trust.critical;
  out.center = trust_blend(circle.center, centroid(locs), circle.trust, crit);
  const double spread = rms_distance(locs, out.center);
  out.radius = std::max(trust_blend(circle.radius, spread, circle.trust, crit), params.min_radius());
  out.speed = trust_blend(circle.speed, group_mean_value(speeds_of(group), params.mean_rule), circle.trust, crit);
}

double match_delta(CircleMatch m) { return m == CircleMatch::Aligned ? 1.0 : -1.0; }

}  // namespace

NormalCircle update_normal_circle(const NormalCircle& circle, std::span<const NormalEdge> group,
                                  CircleMatch match, const CircleParams& params) {
  NormalCircle out = circle;
  if (match == CircleMatch::NoMatch || group.empty()) return out;
  blend_geometry(out, circle, group, params);
  std::vector<double> angles;
  for (const auto& e : group) angles.push_back(e.angle);
  out.angle = trust_blend_angle(circle.angle, group_mean_angle(angles, params.mean_rule), circle.trust,
                                params.trust.critical);
  out.trust = params.trust.clamp(circle.trust + match_delta(match));
  return out;
}

RebelCircle update_rebel_circle(const RebelCircle& circle, std::span<const RebelEdge> group,
                                CircleMatch match, const CircleParams& params) {
  RebelCircle out = circle;
  if (match == CircleMatch::NoMatch || group.empty()) return out;
  blend_geometry(out, circle, group, params);
  const double crit = params.trust.critical;
  out.angle = trust_blend_angle(circle.angle, group_mean_angle(rebel_headings(group), params.mean_rule),
                                circle.trust, crit);
  out.deviation_level = trust_blend(circle.deviation_level,
                                    signed_group_mean(rebel_deviations(group), params.mean_rule), circle.trust, crit);
  out.trust = params.trust.clamp(circle.trust + match_delta(match));
  return out;
}

NormalCircle seed_normal_circle(std::span<const NormalEdge> group, const CircleParams& params) {
  NormalCircle c;
  const auto locs = locations_of(group);
  c.center = centroid(locs);
  c.radius = std::max(rms_distance(locs, c.center), params.min_radius());
  std::vector<double> angles;
  for (const auto& e : group) angles.push_back(e.angle);
  c.angle = group_mean_angle(angles, params.mean_rule);
  c.speed = group_mean_value(speeds_of(group), params.mean_rule);
  c.trust = params.trust.initial();
  return c;
}

RebelCircle seed_rebel_circle(std::span<const RebelEdge> group, const CircleParams& params) {
  RebelCircle c;
  const auto locs = locations_of(group);
  c.center = centroid(locs);
  c.radius = std::max(rms_distance(locs, c.center), params.min_radius());
  c.angle = group_mean_angle(rebel_headings(group), params.mean_rule);
  c.speed = group_mean_value(speeds_of(group), params.mean_rule);
  c.deviation_level = signed_group_mean(rebel_deviations(group), params.mean_rule);
  c.trust = params.trust.initial();
  return c;
}

Feedback emit_feedback(CircleTrackerState& circles, const CircleParams& params, int frame_id, TrustLog* log) {
  Feedback fb;
  for (auto& c : circles.normals) {
    if (c.trust >= params.trust.maximum) {
      fb.regions.push_back(IgnoreRegion::circle(c.center, c.radius, frame_id + params.psi_lifetime));
      const double before = c.trust;
      c.trust = params.trust.standard;
      record(log, frame_id, EntityKind::NormalCircle, c.id, TrustEvent::Refresh, c.trust - before, c.trust);
    }
    fb.collectors.push_back(Collector{c.center, std::max(c.radius, params.initial_boundary)});
  }
  for (const auto& c : circles.rebels) {
    fb.collectors.push_back(Collector{c.center, std::max(c.radius, params.initial_boundary)});
  }
  return fb;
}

namespace {

// Each circle, most trusted first, is compared with the group formed around it;
// whatever no circle took is grouped from scratch and seeds new circles.
template <typename Circle, typename Edge, typename JoinFn, typename MatchFn, typename UpdateFn, typename SeedFn>
std::size_t step_kind(std::vector<Circle>& circles, int& next_id, std::span<const Edge> edges,
                      const CircleParams& params, int frame_id, EntityKind kind, TrustLog* log,
                      std::span<const IgnoreRegion> ignored, JoinFn joins, MatchFn match, UpdateFn update,
                      SeedFn seed) {
  std::vector<char> assigned(edges.size(), 0);
  std::vector<char> matched(circles.size(), 0);
  for (std::size_t c : by_trust(std::span<const Circle>(circles))) {
    const Circle& circle = circles[c];
    const auto g = group_around(edges, assigned, circle.center, std::max(circle.radius, params.initial_boundary),
                                joins);
    if (g.empty()) continue;
    std::vector<Edge> members;
    members.reserve(g.size());
    for (std::size_t i : g) members.push_back(edges[i]);
    const MatchResult m = match(members, circle);
    if (m.kind == CircleMatch::NoMatch) continue;
    Circle next = update(circle, members, m.kind);
    record(log, frame_id, kind, next.id, m.kind == CircleMatch::Aligned ? TrustEvent::Aligned : TrustEvent::Deviated,
           match_delta(m.kind), next.trust);
    circles[c] = next;
    matched[c] = 1;
    for (std::size_t i : g) assigned[i] = 1;
  }

  for (std::size_t c = 0; c < circles.size(); ++c) {
    if (matched[c]) continue;
    // A circle hidden by an ignore region gets no evidence either way.
    const bool hidden = std::any_of(ignored.begin(), ignored.end(), [&](const IgnoreRegion& r) {
      return inside_ignore_region(circles[c].center, r);
    });
    if (hidden) continue;
    circles[c].trust -= 1.0;
    record(log, frame_id, kind, circles[c].id, TrustEvent::Coast, -1.0, circles[c].trust);
  }

  std::vector<Edge> left;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!assigned[i]) left.push_back(edges[i]);
  }
  std::size_t created = 0;
  for (const auto& g : greedy_groups(std::span<const Edge>(left), params.spatial_reach(), joins)) {
    std::vector<Edge> members;
    members.reserve(g.size());
    for (std::size_t i : g) members.push_back(left[i]);
    Circle fresh = seed(members);
    fresh.id = next_id++;
    record(log, frame_id, kind, fresh.id, TrustEvent::Created, 0.0, fresh.trust);
    circles.push_back(fresh);
    ++created;
  }
  std::erase_if(circles, [&](const Circle& c) {
    if (params.trust.survives(c.trust)) return false;
    record(log, frame_id, kind, c.id, TrustEvent::Deleted, 0.0, c.trust);
    return true;
  });
  return created;
}

}  // namespace

Feedback step_circle_tracker(CircleTrackerState& state, std::span<const NormalEdge> normal_edges,
                             std::span<const RebelEdge> rebel_edges, const EgoState& ego,
                             const CircleParams& params, int frame_id, TrustLog* log,
                             CircleStepReport* report, std::span<const IgnoreRegion> ignored) {
  const std::size_t new_normals = step_kind<NormalCircle, NormalEdge>(
      state.normals, state.next_id, normal_edges, params, frame_id, EntityKind::NormalCircle, log, ignored,
      normal_joins(params.eps_beta_group, params.eps_v_group, ego),
      [&](std::span<const NormalEdge> g, const NormalCircle& c) {
        return match_normal_circle(g, c, params.eps_beta_match, params.eps_v_match, params.involvement,
                                   params.mean_rule);
      },
      [&](const NormalCircle& c, std::span<const NormalEdge> g, CircleMatch m) {
        return update_normal_circle(c, g, m, params);
      },
      [&](std::span<const NormalEdge> g) { return seed_normal_circle(g, params); });

  const std::size_t new_rebels = step_kind<RebelCircle, RebelEdge>(
      state.rebels, state.next_id, rebel_edges, params, frame_id, EntityKind::RebelCircle, log, ignored,
      rebel_joins(params.eps_beta_rebel_group, params.eps_v_rebel_group, ego),
      [&](std::span<const RebelEdge> g, const RebelCircle& c) {
        return match_rebel_circle(g, c, params.eps_beta_rebel_match, params.eps_v_rebel_match, ego,
                                  params.involvement, params.mean_rule);
      },
      [&](const RebelCircle& c, std::span<const RebelEdge> g, CircleMatch m) {
        return update_rebel_circle(c, g, m, params);
      },
      [&](std::span<const RebelEdge> g) { return seed_rebel_circle(g, params); });

  Feedback fb = emit_feedback(state, params, frame_id, log);
  if (report) {
    report->created_normals = new_normals;
    report->created_rebels = new_rebels;
    report->emitted_regions = fb.regions.size();
  }
  return fb;
}

}  // namespace lc
