#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lc/fast.hpp"
#include "oracles.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace lc;

namespace {

GrayImage square_image(std::uint8_t bg, std::uint8_t fg) {
  GrayImage img = GrayImage::Constant(40, 40, bg);
  img.block(15, 15, 10, 10).setConstant(fg);
  return img;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("lc_test_fast_" + name);
}

}  // namespace

TEST_CASE("uniform image has no corners") {
  CHECK(detect_fast9(GrayImage::Constant(32, 32, 128)).empty());
  CHECK(detect_fast9_raw(GrayImage::Constant(32, 32, 128), 25).empty());
}

TEST_CASE("bright square gives its four corners") {
  const auto corners = detect_fast9(square_image(0, 255), FastOptions{25, true});
  REQUIRE(corners.size() == 4);
  const int cx[2] = {15, 24};
  const int cy[2] = {15, 24};
  for (const auto& c : corners) {
    bool near_corner = false;
    for (int x : cx) {
      for (int y : cy) near_corner = near_corner || (std::abs(c.x - x) <= 1 && std::abs(c.y - y) <= 1);
    }
    CHECK(near_corner);
  }
  CHECK(detect_fast9(square_image(0, 255), FastOptions{255, true}).empty());
}

TEST_CASE("inverting the image keeps the corner set and scores") {
  const auto a = detect_fast9(square_image(0, 255));
  const auto b = detect_fast9(square_image(255, 0));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y == b[i].y);
    CHECK(a[i].score == b[i].score);
  }

  std::mt19937_64 rng(41);
  for (int i = 0; i < 10; ++i) {
    const GrayImage img = oracle::random_image(rng, 24, 24);
    const GrayImage inv = (GrayImage::Constant(24, 24, 255) - img).eval();
    const auto p = detect_fast9_raw(img, 25);
    const auto q = detect_fast9_raw(inv, 25);
    REQUIRE(p.size() == q.size());
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(p[k].score == q[k].score);
  }
}

TEST_CASE("segment test and suppression equal the brute-force oracle") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 40; ++i) {
    const GrayImage img = oracle::random_image(rng, 32, 32);
    for (int t : {10, 25, 60}) {
      const auto raw = oracle::fast9(img, t);
      CHECK(oracle::same_corners(detect_fast9_raw(img, t), raw));
      CHECK(oracle::same_corners(detect_fast9(img, FastOptions{t, true}), oracle::suppress(raw)));
      CHECK(oracle::same_corners(detect_fast9(img, FastOptions{t, false}), raw));
    }
  }
}

TEST_CASE("suppression keeps the first of equal neighbours") {
  const std::vector<Corner> in{{5, 5, 10}, {6, 5, 10}, {20, 20, 3}, {21, 21, 4}};
  const auto out = nonmax_suppress(in);
  REQUIRE(out.size() == 2);
  CHECK(out[0].x == 5);
  CHECK(out[1].x == 21);
}

TEST_CASE("score is zero away from corners and near the border") {
  const GrayImage img = square_image(0, 255);
  CHECK(fast9_score(img, 5, 5, 25) == 0);
  CHECK(fast9_score(img, 1, 1, 25) == 0);
}

TEST_CASE("corners convert to edge points") {
  const auto e = to_edge_points({{3, 4, 9}}, 7, 1.5);
  REQUIRE(e.size() == 1);
  CHECK(e[0].location == PixelPoint(3, 4));
  CHECK(e[0].frame_id == 7);
  CHECK(e[0].timestamp == 1.5);
}

TEST_CASE("pgm round trip, binary and ascii") {
  std::mt19937_64 rng(43);
  const GrayImage img = oracle::random_image(rng, 17, 9);
  const auto p = temp_file("rt.pgm");
  write_pgm(p, img);
  CHECK(read_pgm(p) == img);

  const auto a = temp_file("ascii.pgm");
  {
    std::ofstream out(a);
    out << "P2\n# comment\n3 2\n255\n0 10 20\n30 40 255\n";
  }
  const GrayImage g = read_pgm(a);
  REQUIRE(g.cols() == 3);
  REQUIRE(g.rows() == 2);
  CHECK(g(1, 2) == 255);
  CHECK(g(0, 1) == 10);

  const auto bad = temp_file("bad.pgm");
  {
    std::ofstream out(bad);
    out << "P7\n1 1\n255\n";
  }
  CHECK_THROWS(read_pgm(bad));
  CHECK_THROWS(read_pgm(temp_file("missing.pgm")));
  std::filesystem::remove(p);
  std::filesystem::remove(a);
  std::filesystem::remove(bad);
}
