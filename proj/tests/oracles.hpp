#pragma once

// Brute-force reference implementations. They are written from the definitions
// (squared-distance scans, explicit arc search) and share no code with the library.

#include "lc/fast.hpp"
#include "lc/line_expert.hpp"
#include "lc/trust_log.hpp"
#include "lc/types.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

struct LineInput {
  std::vector<lc::EdgePoint> edges;
  std::vector<lc::Collector> collectors;
  std::vector<lc::IgnoreRegion> regions;
  int frame_id = 0;
  double default_bs = 25.0;
};

// Integer coordinates and radii so that boundary cases come up often.
inline LineInput random_line_input(std::mt19937_64& rng, int n_edges, int max_regions, int max_collectors) {
  std::uniform_int_distribution<int> ux(0, 159);
  std::uniform_int_distribution<int> uy(0, 119);
  std::uniform_int_distribution<int> ur(3, 30);
  std::uniform_int_distribution<int> un_regions(0, max_regions);
  std::uniform_int_distribution<int> un_collectors(0, max_collectors);
  std::uniform_int_distribution<int> type(0, 2);
  std::uniform_int_distribution<int> expiry(-2, 2);
  LineInput in;
  in.frame_id = 10;
  in.default_bs = ur(rng);
  for (int i = 0; i < n_edges; ++i) in.edges.push_back({lc::PixelPoint(ux(rng), uy(rng)), in.frame_id, 1.0});
  const int nr = un_regions(rng);
  for (int i = 0; i < nr; ++i) {
    lc::IgnoreRegion r;
    r.location = lc::PixelPoint(ux(rng), uy(rng));
    r.type = static_cast<lc::RegionType>(type(rng));
    r.extent = lc::Vector2d(ur(rng), ur(rng));
    if (r.type == lc::RegionType::Circle) r.extent.y() = r.extent.x();
    r.expires_at_frame = in.frame_id + expiry(rng);
    in.regions.push_back(r);
  }
  const int nc = un_collectors(rng);
  for (int i = 0; i < nc; ++i) in.collectors.push_back({lc::PixelPoint(ux(rng), uy(rng)), double(ur(rng))});
  return in;
}

inline double sq(double v) { return v * v; }

inline double dist2(const lc::PixelPoint& a, const lc::PixelPoint& b) {
  return sq(a.x() - b.x()) + sq(a.y() - b.y());
}

inline bool covered(const lc::PixelPoint& p, const lc::IgnoreRegion& r, int frame_id) {
  if (r.expires_at_frame < frame_id) return false;
  if (r.type == lc::RegionType::Circle) return dist2(p, r.location) <= sq(r.extent.x());
  if (r.type == lc::RegionType::Rectangle) {
    return std::abs(p.x() - r.location.x()) <= r.extent.x() && std::abs(p.y() - r.location.y()) <= r.extent.y();
  }
  return false;
}

struct OracleGroup {
  std::optional<std::size_t> collector;
  lc::PixelPoint center;
  double boundary = 0.0;
  std::vector<std::size_t> members;  // indices into the survivors
};

struct OracleGrouping {
  std::vector<std::size_t> survivors;  // raw indices
  std::vector<OracleGroup> groups;
};

inline OracleGrouping line_expert(const std::vector<lc::EdgePoint>& edges,
                                  const std::vector<lc::Collector>& collectors,
                                  const std::vector<lc::IgnoreRegion>& regions, int frame_id, double default_bs) {
  OracleGrouping out;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    bool hit = false;
    for (const auto& r : regions) hit = hit || covered(edges[i].location, r, frame_id);
    if (!hit) out.survivors.push_back(i);
  }
  std::vector<std::vector<std::size_t>> by_collector(collectors.size());
  std::vector<OracleGroup> fresh;
  for (std::size_t s = 0; s < out.survivors.size(); ++s) {
    const lc::PixelPoint& p = edges[out.survivors[s]].location;
    std::optional<std::size_t> pick;
    for (std::size_t c = 0; c < collectors.size(); ++c) {
      const double d = dist2(p, collectors[c].location);
      if (d >= sq(collectors[c].boundary_size)) continue;
      if (!pick || d < dist2(p, collectors[*pick].location)) pick = c;
    }
    if (pick) {
      by_collector[*pick].push_back(s);
      continue;
    }
    std::optional<std::size_t> f;
    for (std::size_t g = 0; g < fresh.size(); ++g) {
      const double d = dist2(p, fresh[g].center);
      if (d >= sq(default_bs)) continue;
      if (!f || d < dist2(p, fresh[*f].center)) f = g;
    }
    if (!f) {
      fresh.push_back({std::nullopt, p, default_bs, {}});
      f = fresh.size() - 1;
    }
    fresh[*f].members.push_back(s);
  }
  for (std::size_t c = 0; c < collectors.size(); ++c) {
    if (!by_collector[c].empty()) {
      out.groups.push_back({c, collectors[c].location, collectors[c].boundary_size, by_collector[c]});
    }
  }
  for (auto& g : fresh) out.groups.push_back(g);
  return out;
}

inline bool same_grouping(const lc::GroupedEdges& got, const OracleGrouping& want) {
  if (got.source_index != want.survivors || got.edges.size() != want.survivors.size()) return false;
  if (got.groups.size() != want.groups.size()) return false;
  for (std::size_t g = 0; g < want.groups.size(); ++g) {
    const auto& a = got.groups[g];
    const auto& b = want.groups[g];
    if (a.collector != b.collector || a.center != b.center || a.boundary_size != b.boundary) return false;
    if (a.members != b.members) return false;
    for (std::size_t m : a.members) {
      if (got.group_of[m] != g) return false;
    }
  }
  return true;
}

inline lc::GrayImage random_image(std::mt19937_64& rng, int w, int h) {
  std::uniform_int_distribution<int> v(0, 255);
  lc::GrayImage img(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img(y, x) = static_cast<std::uint8_t>(v(rng));
  }
  return img;
}

struct OracleCorner {
  int x = 0;
  int y = 0;
  int score = 0;
};

// Segment test written out per starting position of the nine-pixel arc.
inline std::vector<OracleCorner> fast9(const lc::GrayImage& img, int t) {
  static const int ring[16][2] = {{0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0}, {3, 1}, {2, 2}, {1, 3},
                                  {0, 3}, {-1, 3}, {-2, 2}, {-3, 1}, {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}};
  std::vector<OracleCorner> out;
  const int w = static_cast<int>(img.cols());
  const int h = static_cast<int>(img.rows());
  for (int y = 3; y < h - 3; ++y) {
    for (int x = 3; x < w - 3; ++x) {
      const int c = img(y, x);
      int p[16];
      for (int i = 0; i < 16; ++i) p[i] = img(y + ring[i][1], x + ring[i][0]);
      bool corner = false;
      for (int start = 0; start < 16 && !corner; ++start) {
        bool all_bright = true;
        bool all_dark = true;
        for (int k = 0; k < 9; ++k) {
          const int v = p[(start + k) % 16];
          all_bright = all_bright && v > c + t;
          all_dark = all_dark && v < c - t;
        }
        corner = all_bright || all_dark;
      }
      if (!corner) continue;
      int bright = 0;
      int dark = 0;
      for (int i = 0; i < 16; ++i) {
        if (p[i] > c + t) bright += p[i] - c - t;
        if (p[i] < c - t) dark += c - p[i] - t;
      }
      out.push_back({x, y, std::max(bright, dark)});
    }
  }
  return out;
}

// A corner survives unless a neighbour in its 3x3 window scores higher, or
// scores the same and comes first in row-major order.
inline std::vector<OracleCorner> suppress(const std::vector<OracleCorner>& in) {
  std::vector<OracleCorner> out;
  for (const auto& a : in) {
    bool keep = true;
    for (const auto& b : in) {
      if (&a == &b || std::abs(a.x - b.x) > 1 || std::abs(a.y - b.y) > 1) continue;
      const bool b_first = b.y < a.y || (b.y == a.y && b.x < a.x);
      if (b.score > a.score || (b.score == a.score && b_first)) keep = false;
    }
    if (keep) out.push_back(a);
  }
  return out;
}

inline bool same_corners(const std::vector<lc::Corner>& got, const std::vector<OracleCorner>& want) {
  if (got.size() != want.size()) return false;
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i].x != want[i].x || got[i].y != want[i].y || got[i].score != want[i].score) return false;
  }
  return true;
}

struct Replay {
  std::map<std::pair<int, int>, double> live;  // (kind, id) -> trust
  int inconsistent = 0;
};

// Rebuilds every trust value from the per-event delta table alone and checks
// each logged value, the clamp, and deletion below the critical threshold.
inline Replay replay_trust(const lc::TrustLog& log, const lc::TrustThresholds& th) {
  using lc::TrustEvent;
  Replay r;
  auto table = [](TrustEvent e) -> std::optional<double> {
    switch (e) {
      case TrustEvent::Lambda1: return -1.0;
      case TrustEvent::Lambda2: return 1.0;
      case TrustEvent::Lambda3: return -1.0;
      case TrustEvent::Lambda4: return 0.0;
      case TrustEvent::Lambda5: return -1.0;
      case TrustEvent::Coast: return -1.0;
      case TrustEvent::RebelMatch: return 1.0;
      case TrustEvent::Aligned: return 1.0;
      case TrustEvent::Deviated: return -1.0;
      default: return std::nullopt;
    }
  };
  auto end_frame = [&] {
    for (const auto& [key, trust] : r.live) {
      if (trust < th.critical) ++r.inconsistent;
    }
  };
  int frame = log.empty() ? 0 : log.front().frame_id;
  for (const auto& rec : log) {
    if (rec.frame_id != frame) {
      end_frame();
      frame = rec.frame_id;
    }
    const std::pair<int, int> key{static_cast<int>(rec.kind), rec.entity_id};
    const auto it = r.live.find(key);
    if (rec.event == TrustEvent::Created) {
      if (it != r.live.end() || rec.trust_after != 0.5 * (th.critical + th.standard)) ++r.inconsistent;
      r.live[key] = 0.5 * (th.critical + th.standard);
      continue;
    }
    if (it == r.live.end()) {
      ++r.inconsistent;
      continue;
    }
    double& trust = it->second;
    if (rec.event == TrustEvent::Deleted) {
      if (!(trust < th.critical) || rec.trust_after != trust) ++r.inconsistent;
      r.live.erase(it);
    } else if (rec.event == TrustEvent::Released) {
      if (rec.trust_after != trust) ++r.inconsistent;
      r.live.erase(it);
    } else if (rec.event == TrustEvent::Refresh) {
      if (trust < th.maximum) ++r.inconsistent;
      trust = th.standard;
      if (rec.trust_after != trust) ++r.inconsistent;
    } else {
      const auto d = table(rec.event);
      if (!d || rec.delta != *d) {
        ++r.inconsistent;
        continue;
      }
      trust = std::min(trust + *d, th.maximum);
      if (rec.trust_after != trust) ++r.inconsistent;
    }
  }
  end_frame();
  return r;
}

}  // namespace oracle
