#include "lc/fast.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace lc {

namespace {

constexpr int kArc = 9;

bool has_arc(unsigned mask) {
  const unsigned doubled = mask | (mask << 16);
  unsigned run = doubled;
  for (int i = 1; i < kArc; ++i) run &= doubled >> i;
  return run != 0;
}

void check_image(const GrayImage& image) {
  if (image.cols() < 7 || image.rows() < 7) {
    throw std::invalid_argument("FAST9: image must be at least 7x7 pixels");
  }
}

}  // namespace

int fast9_score(const GrayImage& image, int x, int y, int threshold) {
  const int c = image(y, x);
  unsigned bright = 0;
  unsigned dark = 0;
  int bright_sum = 0;
  int dark_sum = 0;
  for (int i = 0; i < 16; ++i) {
    const int p = image(y + kFastRing[i][1], x + kFastRing[i][0]);
    if (p > c + threshold) {
      bright |= 1u << i;
      bright_sum += p - c - threshold;
    } else if (p < c - threshold) {
      dark |= 1u << i;
      dark_sum += c - p - threshold;
    }
  }
  if (!has_arc(bright) && !has_arc(dark)) return 0;
  return std::max(bright_sum, dark_sum);
}

std::vector<Corner> detect_fast9_raw(const GrayImage& image, int threshold) {
  if (threshold <= 0) throw std::invalid_argument("FAST9: threshold must be > 0");
  check_image(image);
  std::vector<Corner> out;
  const int w = static_cast<int>(image.cols());
  const int h = static_cast<int>(image.rows());
  for (int y = 3; y < h - 3; ++y) {
    for (int x = 3; x < w - 3; ++x) {
      const int s = fast9_score(image, x, y, threshold);
      if (s > 0) out.push_back({x, y, s});
    }
  }
  return out;
}

std::vector<Corner> nonmax_suppress(const std::vector<Corner>& corners) {
  if (corners.empty()) return {};
  int w = 0;
  int h = 0;
  for (const auto& c : corners) {
    w = std::max(w, c.x + 2);
    h = std::max(h, c.y + 2);
  }
  // Score lookup with a one-pixel guard; -1 marks "no corner".
  std::vector<int> score(static_cast<std::size_t>(w + 1) * (h + 1), -1);
  auto at = [&](int x, int y) -> int& { return score[static_cast<std::size_t>(y + 1) * (w + 1) + (x + 1)]; };
  for (const auto& c : corners) at(c.x, c.y) = c.score;

  std::vector<Corner> out;
  for (const auto& c : corners) {
    bool keep = true;
    for (int dy = -1; dy <= 1 && keep; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        if (c.x + dx < -1 || c.y + dy < -1) continue;
        const int n = at(c.x + dx, c.y + dy);
        if (n < 0) continue;
        const bool neighbour_first = dy < 0 || (dy == 0 && dx < 0);
        if (n > c.score || (n == c.score && neighbour_first)) {
          keep = false;
          break;
        }
      }
    }
    if (keep) out.push_back(c);
  }
  return out;
}

std::vector<Corner> detect_fast9(const GrayImage& image, const FastOptions& options) {
  auto raw = detect_fast9_raw(image, options.threshold);
  return options.nonmax_suppression ? nonmax_suppress(raw) : raw;
}

std::vector<EdgePoint> to_edge_points(const std::vector<Corner>& corners, int frame_id, double timestamp) {
  std::vector<EdgePoint> out;
  out.reserve(corners.size());
  for (const auto& c : corners) out.push_back({PixelPoint(c.x, c.y), frame_id, timestamp});
  return out;
}

namespace {

std::string next_token(std::istream& in) {
  std::string tok;
  int ch = 0;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw std::runtime_error("PGM: unexpected end of header");
  return tok;
}

int parse_positive(const std::string& tok, const char* what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(tok, &used);
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("PGM: malformed ") + what);
  }
  if (used != tok.size() || v <= 0) throw std::runtime_error(std::string("PGM: malformed ") + what);
  return v;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("PGM: cannot open " + path.string());
  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P2") throw std::runtime_error("PGM: unsupported magic " + magic);
  const int w = parse_positive(next_token(in), "width");
  const int h = parse_positive(next_token(in), "height");
  const int maxval = parse_positive(next_token(in), "maxval");
  if (maxval > 255) throw std::runtime_error("PGM: only 8-bit images are supported");

  GrayImage img(h, w);
  if (magic == "P5") {
    in.read(reinterpret_cast<char*>(img.data()), static_cast<std::streamsize>(img.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.size())) throw std::runtime_error("PGM: truncated data");
  } else {
    for (Eigen::Index i = 0; i < img.size(); ++i) {
      int v = 0;
      if (!(in >> v) || v < 0 || v > maxval) throw std::runtime_error("PGM: malformed ASCII data");
      img.data()[i] = static_cast<std::uint8_t>(v);
    }
  }
  if (maxval != 255) {
    for (Eigen::Index i = 0; i < img.size(); ++i) {
      img.data()[i] = static_cast<std::uint8_t>(img.data()[i] * 255 / maxval);
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("PGM: cannot write " + path.string());
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data()), static_cast<std::streamsize>(image.size()));
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("PPM: cannot write " + path.string());
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()), static_cast<std::streamsize>(image.rgb.size()));
}

}  // namespace lc
