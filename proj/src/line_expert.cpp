#include "lc/line_expert.hpp"

#include "lc/geometry.hpp"

#include <limits>
#include <stdexcept>

namespace lc {

std::vector<std::size_t> surviving_indices(std::span<const EdgePoint> edges,
                                           std::span<const IgnoreRegion> regions, int frame_id) {
  std::vector<const IgnoreRegion*> active;
  for (const auto& r : regions) {
    if (r.active_at(frame_id) && r.type != RegionType::None) active.push_back(&r);
  }
  std::vector<std::size_t> keep;
  keep.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    bool culled = false;
    for (const auto* r : active) {
      if (inside_ignore_region(edges[i].location, *r)) {
        culled = true;
        break;
      }
    }
    if (!culled) keep.push_back(i);
  }
  return keep;
}

std::vector<EdgePoint> cull_edges(std::span<const EdgePoint> edges,
                                  std::span<const IgnoreRegion> regions, int frame_id) {
  std::vector<EdgePoint> out;
  for (std::size_t i : surviving_indices(edges, regions, frame_id)) out.push_back(edges[i]);
  return out;
}

GroupedEdges group_edges(std::span<const EdgePoint> edges, std::span<const Collector> collectors,
                         double default_bs) {
  if (!(default_bs > 0.0)) throw std::invalid_argument("group_edges: default boundary size must be > 0");

  GroupedEdges out;
  out.edges.assign(edges.begin(), edges.end());
  out.source_index.resize(edges.size());
  out.group_of.resize(edges.size());

  // Collector groups are created lazily so that only non-empty ones are emitted,
  // but they are ordered by collector index ahead of Fresh groups.
  std::vector<std::vector<std::size_t>> collector_members(collectors.size());
  std::vector<EdgeGroup> fresh;
  std::vector<std::size_t> fresh_of(edges.size(), std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> collector_of(edges.size(), std::numeric_limits<std::size_t>::max());

  for (std::size_t i = 0; i < edges.size(); ++i) {
    out.source_index[i] = i;
    const PixelPoint& p = edges[i].location;

    std::size_t best = collectors.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < collectors.size(); ++c) {
      if (!within_collector(p, collectors[c])) continue;
      const double d = (collectors[c].location - p).norm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (best < collectors.size()) {
      collector_members[best].push_back(i);
      collector_of[i] = best;
      continue;
    }

    std::size_t best_fresh = fresh.size();
    best_d = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < fresh.size(); ++f) {
      if (!within_radius(p, fresh[f].center, default_bs)) continue;
      const double d = (fresh[f].center - p).norm();
      if (d < best_d) {
        best_d = d;
        best_fresh = f;
      }
    }
    if (best_fresh == fresh.size()) {
      fresh.push_back(EdgeGroup{std::nullopt, p, default_bs, {}});
    }
    fresh[best_fresh].members.push_back(i);
    fresh_of[i] = best_fresh;
  }

  std::vector<std::size_t> collector_group(collectors.size(), 0);
  for (std::size_t c = 0; c < collectors.size(); ++c) {
    if (collector_members[c].empty()) continue;
    collector_group[c] = out.groups.size();
    out.groups.push_back(EdgeGroup{c, collectors[c].location, collectors[c].boundary_size,
                                   std::move(collector_members[c])});
  }
  const std::size_t fresh_base = out.groups.size();
  for (auto& g : fresh) out.groups.push_back(std::move(g));

  for (std::size_t i = 0; i < edges.size(); ++i) {
    out.group_of[i] = collector_of[i] < collectors.size() ? collector_group[collector_of[i]]
                                                          : fresh_base + fresh_of[i];
  }
  return out;
}

GroupedEdges run_line_expert(std::span<const EdgePoint> edges,
                             std::span<const Collector> collectors,
                             std::span<const IgnoreRegion> regions, int frame_id,
                             double default_bs) {
  const auto keep = surviving_indices(edges, regions, frame_id);
  std::vector<EdgePoint> survivors;
  survivors.reserve(keep.size());
  for (std::size_t i : keep) survivors.push_back(edges[i]);
  GroupedEdges out = group_edges(survivors, collectors, default_bs);
  for (std::size_t i = 0; i < keep.size(); ++i) out.source_index[i] = keep[i];
  return out;
}

}  // namespace lc
