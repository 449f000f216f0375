#pragma once

#include "lc/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace lc::detail {

// Uniform bucket grid over a fixed point set; radius queries return indices in
// ascending order so callers stay deterministic.
class GridIndex {
public:
  GridIndex(std::span<const EdgePoint> points, double cell) : points_(points), cell_(cell) {
    if (points.empty()) return;
    min_ = points[0].location;
    PixelPoint max = min_;
    for (const auto& p : points) {
      min_ = min_.cwiseMin(p.location);
      max = max.cwiseMax(p.location);
    }
    cols_ = static_cast<int>((max.x() - min_.x()) / cell_) + 1;
    rows_ = static_cast<int>((max.y() - min_.y()) / cell_) + 1;
    buckets_.resize(static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_));
    for (std::size_t i = 0; i < points.size(); ++i) {
      buckets_[bucket(cell_of(points[i].location.x(), min_.x()), cell_of(points[i].location.y(), min_.y()))]
          .push_back(i);
    }
  }

  std::vector<std::size_t> query(const PixelPoint& center, double radius) const {
    std::vector<std::size_t> out;
    if (points_.empty() || !(radius >= 0.0)) return out;
    const int x0 = std::max(0, cell_of(center.x() - radius, min_.x()));
    const int x1 = std::min(cols_ - 1, cell_of(center.x() + radius, min_.x()));
    const int y0 = std::max(0, cell_of(center.y() - radius, min_.y()));
    const int y1 = std::min(rows_ - 1, cell_of(center.y() + radius, min_.y()));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        for (std::size_t i : buckets_[bucket(x, y)]) {
          if ((points_[i].location - center).norm() <= radius) out.push_back(i);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

private:
  int cell_of(double v, double origin) const {
    const double c = std::floor((v - origin) / cell_);
    if (c < -1e9) return -1000000000;
    if (c > 1e9) return 1000000000;
    return static_cast<int>(c);
  }
  std::size_t bucket(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(x);
  }

  std::span<const EdgePoint> points_;
  double cell_;
  PixelPoint min_ = PixelPoint::Zero();
  int cols_ = 0;
  int rows_ = 0;
  std::vector<std::vector<std::size_t>> buckets_;
};

}  // namespace lc::detail
