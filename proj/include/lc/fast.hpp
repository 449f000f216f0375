#pragma once

#include "lc/types.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace lc {

// Row-major 8-bit grayscale image; image(y, x).
using GrayImage = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

  void set(int x, int y, std::array<std::uint8_t, 3> c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    const std::size_t o = (static_cast<std::size_t>(y) * width + x) * 3;
    rgb[o] = c[0];
    rgb[o + 1] = c[1];
    rgb[o + 2] = c[2];
  }
};

// Offsets (dx, dy) of the 16-pixel Bresenham circle of radius 3, clockwise from the top.
inline constexpr std::array<std::array<int, 2>, 16> kFastRing{{
    {0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0}, {3, 1}, {2, 2}, {1, 3},
    {0, 3}, {-1, 3}, {-2, 2}, {-3, 1}, {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3},
}};

struct Corner {
  int x = 0;
  int y = 0;
  int score = 0;
};

struct FastOptions {
  int threshold = 25;
  bool nonmax_suppression = true;
};

// 0 when the pixel is not a corner; otherwise the larger of the bright and
// dark sums of threshold exceedances over the ring.
int fast9_score(const GrayImage& image, int x, int y, int threshold);

// Segment test over every pixel at least 3 away from the border, sorted by (y, x).
std::vector<Corner> detect_fast9_raw(const GrayImage& image, int threshold);

// 3x3 suppression; equal scores keep the corner earliest in (y, x) order.
std::vector<Corner> nonmax_suppress(const std::vector<Corner>& corners);

std::vector<Corner> detect_fast9(const GrayImage& image, const FastOptions& options = {});

std::vector<EdgePoint> to_edge_points(const std::vector<Corner>& corners, int frame_id, double timestamp);

// PGM P5/P2 input, P5/P6 output.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);

}  // namespace lc
