#pragma once

#include "lc/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace lc {

struct EdgeGroup {
  std::optional<std::size_t> collector;  // empty for Fresh groups
  PixelPoint center = PixelPoint::Zero();
  double boundary_size = 0.0;
  std::vector<std::size_t> members;      // indices into GroupedEdges::edges
};

// The Edge matrix after the Line expert: survivors in input order plus their grouping.
struct GroupedEdges {
  std::vector<EdgePoint> edges;
  std::vector<std::size_t> source_index;  // position of each survivor in the raw frame
  std::vector<EdgeGroup> groups;
  std::vector<std::size_t> group_of;      // group index per survivor

  std::size_t group_size_of(std::size_t edge) const { return groups[group_of[edge]].members.size(); }
  bool empty() const { return edges.empty(); }
};

// Indices of the edges outside every region still active at `frame_id`.
std::vector<std::size_t> surviving_indices(std::span<const EdgePoint> edges,
                                           std::span<const IgnoreRegion> regions, int frame_id);

std::vector<EdgePoint> cull_edges(std::span<const EdgePoint> edges,
                                  std::span<const IgnoreRegion> regions, int frame_id);

// Each edge joins the nearest collector that contains it (ties to the lower
// index); the rest seed Fresh groups greedily in input order.
GroupedEdges group_edges(std::span<const EdgePoint> edges, std::span<const Collector> collectors,
                         double default_bs);

GroupedEdges run_line_expert(std::span<const EdgePoint> edges,
                             std::span<const Collector> collectors,
                             std::span<const IgnoreRegion> regions, int frame_id,
                             double default_bs);

}  // namespace lc
