#include "lc/pipeline.hpp"

#include "lc/geometry.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>

namespace lc {

TrackerParams RunConfig::tracker_params() const {
  TrackerParams p;
  p.trust = trust;
  p.initial_boundary = initial_boundary;
  p.rebel_radius = rebel_radius;
  p.eps_beta = eps_beta_group;
  p.eps_v = eps_v_group;
  p.rebel_max_deviation = rebel_max_deviation;
  return p;
}

CircleParams RunConfig::circle_params() const {
  CircleParams p;
  p.trust = trust;
  p.initial_boundary = initial_boundary;
  p.eps_beta_group = eps_beta_group;
  p.eps_v_group = eps_v_group;
  p.eps_beta_match = eps_beta_match;
  p.eps_v_match = eps_v_match;
  p.eps_beta_rebel_group = eps_beta_rebel_group;
  p.eps_v_rebel_group = eps_v_rebel_group;
  p.eps_beta_rebel_match = eps_beta_rebel_match;
  p.eps_v_rebel_match = eps_v_rebel_match;
  p.involvement = involvement;
  p.psi_lifetime = psi_lifetime;
  p.mean_rule = mean_rule;
  return p;
}

ErrorModel RunConfig::error_model() const {
  ErrorModel e;
  e.rotational_span = error_span;
  return e;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid configuration: ") + what);
  };
  require(trust.valid(), "trust thresholds must satisfy Tr_cr < Tr_s < Tr_max");
  require(error_span >= 0.0, "error span must be >= 0");
  require(initial_boundary > 0.0, "initial boundary must be > 0");
  require(rebel_radius > 0.0, "rebel radius must be > 0");
  require(eps_beta_group > 0.0 && eps_v_group > 0.0, "grouping epsilons must be > 0");
  require(eps_beta_match > 0.0 && eps_v_match > 0.0, "matching epsilons must be > 0");
  require(eps_beta_rebel_group > 0.0 && eps_v_rebel_group > 0.0, "rebel grouping epsilons must be > 0");
  require(eps_beta_rebel_match > 0.0 && eps_v_rebel_match > 0.0, "rebel matching epsilons must be > 0");
  require(involvement > 0.0 && involvement <= 1.0, "involvement must be in (0, 1]");
  require(psi_lifetime >= 0, "psi lifetime must be >= 0");
  require(pixels_per_unit > 0.0, "pixels per unit must be > 0");
  require(frame_interval > 0.0, "frame interval must be > 0");
  require(fast_threshold > 0, "FAST threshold must be > 0");
  require(frame.width > 0 && frame.height > 0, "frame size must be positive");
}

long compute_dimensionality(const FilterState& state) {
  return 6L * static_cast<long>(state.edges.normals.size()) + 9L * static_cast<long>(state.edges.rebels.size()) +
         6L * static_cast<long>(state.circles.normals.size()) + 7L * static_cast<long>(state.circles.rebels.size()) +
         5L * static_cast<long>(state.regions.size()) + 3L * static_cast<long>(state.collectors.size());
}

FrameReport process_frame(FilterState& state, const FrameInput& input, const RunConfig& config, TrustLog* log) {
  if (input.frame_id <= state.frame_id) {
    throw std::invalid_argument("process_frame: frame ids must increase (got " + std::to_string(input.frame_id) +
                                " after " + std::to_string(state.frame_id) + ")");
  }
  EgoState ego;
  ego.frame_interval = state.last_timestamp ? input.timestamp - *state.last_timestamp : config.frame_interval;
  if (!(ego.frame_interval > 0.0)) throw std::invalid_argument("process_frame: timestamps must increase");
  ego.speed = input.ego_speed * config.pixels_per_unit;
  ego.distance_traveled = input.ego_distance * config.pixels_per_unit;

  FrameReport rep;
  rep.frame_id = input.frame_id;
  rep.raw_edges = input.edges.size();

  // Rebels must stay watched: a region that would hide where a rebel track,
  // rebel chain or rebel circle is expected this frame is lifted.
  std::vector<std::pair<PixelPoint, double>> watched;
  for (const auto& r : state.edges.rebels) watched.emplace_back(predict_rebel_edge(r, ego).location, r.boundary_layer);
  for (const auto& c : state.edges.chains) {
    const PixelPoint next = c.frames_checked >= 2 ? PixelPoint(2.0 * c.points[1] - c.points[0]) : c.last();
    watched.emplace_back(next, config.rebel_radius);
  }
  for (const auto& c : state.circles.rebels) watched.emplace_back(c.center, c.radius);
  std::erase_if(state.regions, [&](const IgnoreRegion& region) {
    return std::any_of(watched.begin(), watched.end(), [&](const auto& w) {
      IgnoreRegion grown = region;
      grown.extent.array() += w.second;
      return inside_ignore_region(w.first, grown);
    });
  });

  const GroupedEdges grouped = run_line_expert(input.edges, state.collectors, state.regions, input.frame_id,
                                               config.initial_boundary);
  rep.culled = input.edges.size() - grouped.edges.size();
  rep.culled_mask.assign(input.edges.size(), 1);
  for (std::size_t i : grouped.source_index) rep.culled_mask[i] = 0;

  std::vector<IgnoreRegion> active;
  for (const auto& r : state.regions) {
    if (r.active_at(input.frame_id)) active.push_back(r);
  }
  const EdgeStepReport er = step_edge_tracker(grouped, state.edges, ego, state.error, config.frame,
                                              config.tracker_params(), input.frame_id, log, active);
  rep.consumed = er.consumed;
  rep.spawned = er.spawned;
  rep.absorbed = er.absorbed;
  rep.rejected = er.rejected;
  rep.promoted = er.promoted;

  CircleStepReport cr;
  Feedback fb = step_circle_tracker(state.circles, state.edges.normals, state.edges.rebels, ego,
                                    config.circle_params(), input.frame_id, log, &cr, active);
  rep.emitted_regions = fb.regions.size();
  state.collectors = std::move(fb.collectors);
  for (auto& r : fb.regions) state.regions.push_back(r);
  std::erase_if(state.regions, [&](const IgnoreRegion& r) { return !r.active_at(input.frame_id + 1); });

  state.frame_id = input.frame_id;
  state.last_timestamp = input.timestamp;

  rep.n_normal_edges = state.edges.normals.size();
  rep.n_rebel_edges = state.edges.rebels.size();
  rep.n_chains = state.edges.chains.size();
  rep.n_normal_circles = state.circles.normals.size();
  rep.n_rebel_circles = state.circles.rebels.size();
  rep.n_regions = state.regions.size();
  rep.n_collectors = state.collectors.size();
  rep.dimensionality = compute_dimensionality(state);
  // Created entities that were deleted again within the frame never reach the state;
  // counting them anyway only loosens the allowance by what was actually spawned.
  rep.spawn_allowance = 6L * static_cast<long>(er.spawned) + 9L * static_cast<long>(er.promoted) +
                        (6L + 3L) * static_cast<long>(cr.created_normals) +
                        (7L + 3L) * static_cast<long>(cr.created_rebels) + 5L * static_cast<long>(cr.emitted_regions);
  return rep;
}

FrameInput to_frame_input(const SimFrame& frame) {
  return FrameInput{frame.frame_id, frame.timestamp, frame.edges, frame.ego_speed, frame.ego_distance};
}

namespace {

using nlohmann::json;

json point(const PixelPoint& p) { return json::array({p.x(), p.y()}); }
PixelPoint point(const json& j) { return PixelPoint(j.at(0).get<double>(), j.at(1).get<double>()); }

}  // namespace

std::string serialize_state(const FilterState& s) {
  json j;
  j["version"] = 1;
  j["frame_id"] = s.frame_id;
  j["last_timestamp"] = s.last_timestamp ? json(*s.last_timestamp) : json(nullptr);
  j["error"] = {{"rotational_span", s.error.rotational_span},
                {"governing_errors", point(s.error.governing_errors)}};

  json en = json::array();
  for (const auto& e : s.edges.normals) {
    en.push_back({{"id", e.id}, {"location", point(e.location)}, {"bl", e.boundary_layer}, {"trust", e.trust},
                  {"angle", e.angle}, {"speed", e.speed}, {"obs", e.observation}});
  }
  json er = json::array();
  for (const auto& e : s.edges.rebels) {
    er.push_back({{"id", e.id}, {"location", point(e.location)}, {"trust", e.trust}, {"angle", e.angle},
                  {"speed", e.speed}, {"dl", e.deviation_level}, {"origin", point(e.origin)},
                  {"bl", e.boundary_layer}, {"obs", e.observation}});
  }
  json ch = json::array();
  for (const auto& c : s.edges.chains) {
    json pts = json::array();
    for (int i = 0; i < c.frames_checked; ++i) pts.push_back(point(c.points[static_cast<std::size_t>(i)]));
    ch.push_back({{"id", c.id}, {"points", pts}, {"obs", c.observation}});
  }
  j["edges"] = {{"normals", en}, {"rebels", er}, {"chains", ch}, {"next_id", s.edges.next_id}};

  json cn = json::array();
  for (const auto& c : s.circles.normals) {
    cn.push_back({{"id", c.id}, {"center", point(c.center)}, {"radius", c.radius}, {"trust", c.trust},
                  {"angle", c.angle}, {"speed", c.speed}});
  }
  json crr = json::array();
  for (const auto& c : s.circles.rebels) {
    crr.push_back({{"id", c.id}, {"center", point(c.center)}, {"radius", c.radius}, {"trust", c.trust},
                   {"angle", c.angle}, {"speed", c.speed}, {"dl", c.deviation_level}});
  }
  j["circles"] = {{"normals", cn}, {"rebels", crr}, {"next_id", s.circles.next_id}};

  json col = json::array();
  for (const auto& c : s.collectors) col.push_back({{"location", point(c.location)}, {"bs", c.boundary_size}});
  j["collectors"] = col;
  json reg = json::array();
  for (const auto& r : s.regions) {
    reg.push_back({{"location", point(r.location)}, {"extent", point(r.extent)},
                   {"type", static_cast<int>(r.type)}, {"expires", r.expires_at_frame}});
  }
  j["regions"] = reg;
  return j.dump(1);
}

FilterState deserialize_state(const std::string& text) {
  FilterState s;
  json j;
  try {
    j = json::parse(text);
    if (j.at("version").get<int>() != 1) throw std::runtime_error("unsupported state version");
    s.frame_id = j.at("frame_id").get<int>();
    if (!j.at("last_timestamp").is_null()) s.last_timestamp = j.at("last_timestamp").get<double>();
    s.error.rotational_span = j.at("error").at("rotational_span").get<double>();
    s.error.governing_errors = point(j.at("error").at("governing_errors"));

    const auto& edges = j.at("edges");
    for (const auto& e : edges.at("normals")) {
      NormalEdge n;
      n.id = e.at("id").get<int>();
      n.location = point(e.at("location"));
      n.boundary_layer = e.at("bl").get<double>();
      n.trust = e.at("trust").get<double>();
      n.angle = e.at("angle").get<double>();
      n.speed = e.at("speed").get<double>();
      n.observation = e.at("obs").get<int>();
      s.edges.normals.push_back(n);
    }
    for (const auto& e : edges.at("rebels")) {
      RebelEdge r;
      r.id = e.at("id").get<int>();
      r.location = point(e.at("location"));
      r.trust = e.at("trust").get<double>();
      r.angle = e.at("angle").get<double>();
      r.speed = e.at("speed").get<double>();
      r.deviation_level = e.at("dl").get<double>();
      r.origin = point(e.at("origin"));
      r.boundary_layer = e.at("bl").get<double>();
      r.observation = e.at("obs").get<int>();
      s.edges.rebels.push_back(r);
    }
    for (const auto& e : edges.at("chains")) {
      RebelCandidateChain c;
      c.id = e.at("id").get<int>();
      const auto& pts = e.at("points");
      if (pts.size() > 3) throw std::runtime_error("rebel chain longer than 3");
      c.frames_checked = static_cast<int>(pts.size());
      for (std::size_t i = 0; i < pts.size(); ++i) c.points[i] = point(pts[i]);
      c.observation = e.at("obs").get<int>();
      s.edges.chains.push_back(c);
    }
    s.edges.next_id = edges.at("next_id").get<int>();

    const auto& circles = j.at("circles");
    for (const auto& e : circles.at("normals")) {
      NormalCircle c;
      c.id = e.at("id").get<int>();
      c.center = point(e.at("center"));
      c.radius = e.at("radius").get<double>();
      c.trust = e.at("trust").get<double>();
      c.angle = e.at("angle").get<double>();
      c.speed = e.at("speed").get<double>();
      s.circles.normals.push_back(c);
    }
    for (const auto& e : circles.at("rebels")) {
      RebelCircle c;
      c.id = e.at("id").get<int>();
      c.center = point(e.at("center"));
      c.radius = e.at("radius").get<double>();
      c.trust = e.at("trust").get<double>();
      c.angle = e.at("angle").get<double>();
      c.speed = e.at("speed").get<double>();
      c.deviation_level = e.at("dl").get<double>();
      s.circles.rebels.push_back(c);
    }
    s.circles.next_id = circles.at("next_id").get<int>();

    for (const auto& e : j.at("collectors")) {
      s.collectors.push_back(Collector{point(e.at("location")), e.at("bs").get<double>()});
    }
    for (const auto& e : j.at("regions")) {
      IgnoreRegion r;
      r.location = point(e.at("location"));
      r.extent = point(e.at("extent"));
      const int type = e.at("type").get<int>();
      if (type < 0 || type > 2) throw std::runtime_error("unknown region type");
      r.type = static_cast<RegionType>(type);
      r.expires_at_frame = e.at("expires").get<int>();
      s.regions.push_back(r);
    }
  } catch (const json::exception& ex) {
    throw std::runtime_error(std::string("malformed filter state: ") + ex.what());
  }
  return s;
}

}  // namespace lc
