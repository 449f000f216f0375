#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lc/edge_tracker.hpp"
#include "lc/geometry.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace lc;

namespace {

bool near(double a, double b) { return std::abs(a - b) <= 1e-9; }

const FrameGeometry kFrame;

GroupedEdges group(const std::vector<PixelPoint>& ps, int frame_id) {
  std::vector<EdgePoint> e;
  for (const auto& p : ps) e.push_back({p, frame_id, double(frame_id)});
  return run_line_expert(e, {}, {}, frame_id, 25.0);
}

}  // namespace

TEST_CASE("trust deltas") {
  CHECK(trust_delta(Classification::Lambda1) == -1.0);
  CHECK(trust_delta(Classification::Lambda2) == 1.0);
  CHECK(trust_delta(Classification::Lambda3) == -1.0);
  CHECK(trust_delta(Classification::Lambda4) == 0.0);
  CHECK(trust_delta(Classification::Lambda5) == -1.0);
}

TEST_CASE("normal prediction follows the radial flow") {
  NormalEdge e;
  e.location = PixelPoint(400, 300);
  CHECK(predict_normal_edge(e, EgoState{0, 0, 1}, kFrame).location == e.location);

  e.location = PixelPoint(420, 240);
  e.speed = 10;
  const auto p = predict_normal_edge(e, EgoState{10, 0, 1}, kFrame);
  CHECK(near(p.location.x(), 430));
  CHECK(near(p.location.y(), 240));

  e.location = PixelPoint(320, 140);
  e.speed = 4;
  const auto q = predict_normal_edge(e, EgoState{6, 0, 1}, kFrame);
  CHECK(near(q.location.x(), 320));
  CHECK(near(q.location.y(), 135));
  CHECK(near(q.speed, 5));

  e.location = kFrame.center();
  CHECK_THROWS_AS(predict_normal_edge(e, EgoState{6, 0, 1}, kFrame), GeometryError);
}

TEST_CASE("classification of the three worked observations") {
  const ErrorModel em;
  const EgoState ego{10, 0, 1};
  NormalEdge prev;
  prev.location = PixelPoint(420, 240);
  prev.speed = 10;
  prev.boundary_layer = 10;
  const auto pred = predict_normal_edge(prev, ego, kFrame);

  CHECK(classify(pred.location, pred, prev, em, kFrame, 20, 10, ego) == Classification::Lambda2);

  const PixelPoint beyond = pred.location + PixelPoint(1.5 * (pred.boundary_layer + em.rotational_span), 0);
  CHECK(classify(beyond, pred, prev, em, kFrame, 20, 10, ego) == Classification::Lambda1);

  // half a boundary layer from the previous spot, 20 degrees off the ray
  const PixelPoint off = prev.location + 0.5 * prev.boundary_layer * unit_from_degrees(110.0);
  CHECK(error_span_distance(off, prev.location, kFrame) > em.rotational_span);
  CHECK(classify(off, pred, prev, em, kFrame, 20, 10, ego) == Classification::Lambda5);
}

TEST_CASE("an observation moving back toward the center is not consistent") {
  const ErrorModel em;
  const EgoState ego{10, 0, 1};
  NormalEdge prev;
  prev.location = PixelPoint(420, 240);
  prev.speed = 10;
  prev.boundary_layer = 25;
  const auto pred = predict_normal_edge(prev, ego, kFrame);
  CHECK(classify(PixelPoint(405, 240), pred, prev, em, kFrame, 20, 10, ego) == Classification::Lambda3);
}

TEST_CASE("normal update collapse cases") {
  const TrustThresholds trust;
  const EgoState ego{6, 0, 1};
  NormalEdge prev;
  prev.location = PixelPoint(420, 240);
  prev.trust = trust.critical;
  prev.speed = 6;
  prev.boundary_layer = 20;
  const auto pred = predict_normal_edge(prev, ego, kFrame);

  const PixelPoint obs(429, 241);
  CHECK(update_normal_edge(prev, pred, obs, ego, kFrame, 2, Classification::Lambda2, trust).location == obs);

  const auto same = update_normal_edge(prev, pred, pred.location, ego, kFrame, 5, Classification::Lambda2, trust);
  CHECK(near(same.speed, ego.speed));
  for (std::size_t corr : {1u, 2u, 7u}) {
    CHECK(near(update_normal_edge(prev, pred, obs, ego, kFrame, corr, Classification::Lambda2, trust).boundary_layer,
               10.0));
  }
  CHECK_THROWS_AS(update_normal_edge(prev, pred, obs, ego, kFrame, 0, Classification::Lambda2, trust),
                  std::invalid_argument);
}

TEST_CASE("normal update trust stays within the clamp") {
  const TrustThresholds trust;
  const EgoState ego{6, 0, 1};
  NormalEdge prev;
  prev.location = PixelPoint(420, 240);
  prev.trust = trust.maximum;
  prev.speed = 6;
  const auto pred = predict_normal_edge(prev, ego, kFrame);
  CHECK(update_normal_edge(prev, pred, pred.location, ego, kFrame, 1, Classification::Lambda2, trust).trust ==
        trust.maximum);
  CHECK(update_normal_edge(prev, pred, pred.location, ego, kFrame, 1, Classification::Lambda3, trust).trust ==
        trust.maximum - 1);
}

TEST_CASE("rebel chain promotion values") {
  TrackerParams tp;
  RebelCandidateChain chain;
  chain.points = {PixelPoint(0, 0), PixelPoint(10, 0), PixelPoint::Zero()};
  chain.frames_checked = 2;
  const EgoState ego{0, 0, 1};

  const auto step = advance_rebel_chain(chain, PixelPoint(20, 10), tp.rebel_max_deviation, 4.0, ego, tp);
  REQUIRE(std::holds_alternative<ChainPromote>(step));
  const auto& r = std::get<ChainPromote>(step).rebel;
  const double beta = std::atan2(10.0, 20.0) * 180.0 / std::numbers::pi;
  CHECK(near(r.angle, beta));
  CHECK(near(r.deviation_level, beta));
  // |L3 - L2| = |(10, 10)|
  CHECK(near(r.speed, std::sqrt(200.0)));
  CHECK(r.origin == PixelPoint(0, 0));
  CHECK(near(r.trust, 2.5));

  CHECK(std::holds_alternative<ChainDiscard>(advance_rebel_chain(chain, std::nullopt, 50, 4.0, ego, tp)));

  const auto straight = advance_rebel_chain(chain, PixelPoint(20, 0), 50, 4.0, ego, tp);
  REQUIRE(std::holds_alternative<ChainPromote>(straight));
  CHECK(near(std::get<ChainPromote>(straight).rebel.deviation_level, 0.0));

  // a sharp turn leaves the corridor
  CHECK(std::holds_alternative<ChainDiscard>(advance_rebel_chain(chain, PixelPoint(10, 10), 50, 4.0, ego, tp)));
}

TEST_CASE("rebel chain opening") {
  TrackerParams tp;
  const EgoState ego{0, 0, 1};
  RebelCandidateChain empty;
  const auto first = advance_rebel_chain(empty, PixelPoint(5, 5), 50, 4.0, ego, tp);
  REQUIRE(std::holds_alternative<ChainContinue>(first));
  const auto one = std::get<ChainContinue>(first).chain;
  CHECK(one.frames_checked == 1);
  CHECK(std::holds_alternative<ChainContinue>(advance_rebel_chain(one, PixelPoint(15, 5), 50, 4.0, ego, tp)));
  CHECK(std::holds_alternative<ChainDiscard>(advance_rebel_chain(one, PixelPoint(105, 5), 50, 4.0, ego, tp)));
}

TEST_CASE("rebel deviation update") {
  const TrustThresholds trust;
  const EgoState ego{0, 0, 1};
  RebelEdge r;
  r.origin = PixelPoint(0, 0);
  r.location = PixelPoint(100, 0);
  r.angle = 0;
  r.deviation_level = 5;
  const PixelPoint at5 = 100.0 * unit_from_degrees(5.0);
  CHECK(near(update_rebel_edge(r, r, at5, ego, trust).deviation_level, 5.0));
  r.deviation_level = 0;
  CHECK(near(update_rebel_edge(r, r, at5, ego, trust).deviation_level, -5.0));
  const auto along = update_rebel_edge(r, r, PixelPoint(150, 0), ego, trust);
  CHECK(near(along.angle, 0.0));
  CHECK(along.trust == 3.5);
}

TEST_CASE("rebel prediction steps along bearing plus deviation") {
  RebelEdge r;
  r.location = PixelPoint(100, 100);
  r.angle = 80;
  r.deviation_level = 10;
  r.speed = 7;
  const auto p = predict_rebel_edge(r, EgoState{0, 0, 2});
  CHECK(near(p.location.x(), 100));
  CHECK(near(p.location.y(), 114));
}

TEST_CASE("first frame creates one normal edge per observation") {
  EdgeTrackerState st;
  const std::vector<PixelPoint> ps{{100, 100}, {200, 50}, {500, 400}, {50, 420}, {600, 60},
                                   {330, 200}, {250, 300}, {400, 100}, {120, 240}, {620, 240}};
  const auto rep = step_edge_tracker(group(ps, 1), st, EgoState{4, 0, 1}, ErrorModel{}, kFrame, TrackerParams{}, 1);
  REQUIRE(st.normals.size() == 10);
  CHECK(rep.spawned == 10);
  for (const auto& e : st.normals) {
    CHECK(e.speed == 4.0);
    CHECK(e.trust == 2.5);
    CHECK(e.boundary_layer == 25.0);
  }
}

TEST_CASE("a static edge seen where predicted gains trust up to the maximum") {
  EdgeTrackerState st;
  TrustLog log;
  const EgoState ego{5, 0, 1};
  const TrackerParams tp;
  step_edge_tracker(group({PixelPoint(420, 240)}, 1), st, ego, ErrorModel{}, kFrame, tp, 1, &log);
  for (int f = 2; f <= 4; ++f) {
    REQUIRE(st.normals.size() == 1);
    const auto pred = predict_normal_edge(st.normals[0], ego, kFrame);
    step_edge_tracker(group({pred.location}, f), st, ego, ErrorModel{}, kFrame, tp, f, &log);
  }
  REQUIRE(st.normals.size() == 1);
  CHECK(st.normals[0].trust == 5.0);
  const auto replay = oracle::replay_trust(log, tp.trust);
  CHECK(replay.inconsistent == 0);
  CHECK(replay.live.size() == 1);
}

TEST_CASE("an edge that is never seen again is deleted after one coast") {
  EdgeTrackerState st;
  TrustLog log;
  const TrackerParams tp;
  step_edge_tracker(group({PixelPoint(420, 240)}, 1), st, EgoState{5, 0, 1}, ErrorModel{}, kFrame, tp, 1, &log);
  step_edge_tracker(group({}, 2), st, EgoState{5, 0, 1}, ErrorModel{}, kFrame, tp, 2, &log);
  CHECK(st.normals.empty());
  REQUIRE(log.size() == 3);
  CHECK(log[1].event == TrustEvent::Coast);
  CHECK(log[1].trust_after == 1.5);
  CHECK(log[2].event == TrustEvent::Deleted);
}

TEST_CASE("an edge on the frame center is rejected") {
  EdgeTrackerState st;
  const auto rep = step_edge_tracker(group({kFrame.center()}, 1), st, EgoState{5, 0, 1}, ErrorModel{}, kFrame,
                                     TrackerParams{}, 1);
  CHECK(rep.rejected == 1);
  CHECK(st.normals.empty());
}

TEST_CASE("a straight rebel keeps a bounded deviation level") {
  // Points moving left-to-right across the frame, which the radial model cannot explain.
  EdgeTrackerState st;
  const TrackerParams tp;
  const EgoState ego{2, 0, 1};
  int promoted_at = 0;
  for (int f = 1; f <= 12; ++f) {
    const PixelPoint p(100.0 + 15.0 * f, 100.0 + 0.3 * std::sin(f));
    const auto rep = step_edge_tracker(group({p}, f), st, ego, ErrorModel{}, kFrame, tp, f);
    if (rep.promoted > 0 && promoted_at == 0) promoted_at = f;
    for (const auto& r : st.rebels) {
      CHECK(std::abs(r.deviation_level) <= tp.rebel_max_deviation);
      CHECK(std::isfinite(r.deviation_level));
    }
  }
  CHECK(promoted_at > 0);
  REQUIRE(st.rebels.size() == 1);
  const auto& r = st.rebels[0];
  const PixelPoint next(100.0 + 15.0 * 13, 100.0 + 0.3 * std::sin(13));
  CHECK((predict_rebel_edge(r, ego).location - next).norm() < tp.rebel_radius);
}
