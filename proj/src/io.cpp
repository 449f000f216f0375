#include "lc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace lc {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_token(std::string_view tok, const char* what, std::size_t line_no) {
  T v{};
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": malformed " + what + " '" + std::string(tok) +
                             "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": non-finite " + what);
    }
  }
  return v;
}

bool skip_line(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

void write_edge_stream(std::ostream& out, const std::vector<EdgeFrame>& frames) {
  for (const auto& f : frames) {
    out << f.frame_id << ' ' << format_number(f.timestamp);
    for (const auto& p : f.points) out << ' ' << format_number(p.x()) << ' ' << format_number(p.y());
    out << '\n';
  }
}

std::vector<EdgeFrame> read_edge_stream(std::istream& in) {
  std::vector<EdgeFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const auto toks = split_ws(line);
    if (toks.size() < 2 || toks.size() % 2 != 0) {
      throw std::runtime_error("edge stream line " + std::to_string(line_no) +
                               ": expected frame_id, timestamp and x y pairs");
    }
    EdgeFrame f;
    f.frame_id = parse_token<int>(toks[0], "frame id", line_no);
    f.timestamp = parse_token<double>(toks[1], "timestamp", line_no);
    if (!frames.empty() && f.frame_id <= frames.back().frame_id) {
      throw std::runtime_error("edge stream line " + std::to_string(line_no) + ": frame ids must increase");
    }
    for (std::size_t i = 2; i < toks.size(); i += 2) {
      f.points.emplace_back(parse_token<double>(toks[i], "x", line_no), parse_token<double>(toks[i + 1], "y", line_no));
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

void write_ego_log(std::ostream& out, const std::vector<EgoRecord>& records) {
  for (const auto& r : records) {
    out << r.frame_id << ' ' << format_number(r.speed) << ' ' << format_number(r.distance) << '\n';
  }
}

std::vector<EgoRecord> read_ego_log(std::istream& in) {
  std::vector<EgoRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const auto toks = split_ws(line);
    if (toks.size() != 3) {
      throw std::runtime_error("ego log line " + std::to_string(line_no) + ": expected frame_id speed distance");
    }
    out.push_back(EgoRecord{parse_token<int>(toks[0], "frame id", line_no),
                            parse_token<double>(toks[1], "speed", line_no),
                            parse_token<double>(toks[2], "distance", line_no)});
  }
  return out;
}

std::vector<EdgeFrame> read_edge_stream(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_edge_stream(in);
}

std::vector<EgoRecord> read_ego_log(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_ego_log(in);
}

EdgeFrame to_edge_frame(const SimFrame& frame) {
  EdgeFrame f{frame.frame_id, frame.timestamp, {}};
  f.points.reserve(frame.edges.size());
  for (const auto& e : frame.edges) f.points.push_back(e.location);
  return f;
}

EgoRecord to_ego_record(const SimFrame& frame) { return {frame.frame_id, frame.ego_speed, frame.ego_distance}; }

std::string metrics_row(const FrameReport& r) {
  std::ostringstream os;
  os << r.frame_id << ',' << r.raw_edges << ',' << r.culled << ',' << r.n_normal_edges << ',' << r.n_rebel_edges
     << ',' << r.n_normal_circles << ',' << r.n_rebel_circles << ',' << r.n_regions << ',' << r.dimensionality;
  return os.str();
}

MetricsSummary summarize_metrics(std::istream& csv) {
  std::string line;
  if (!std::getline(csv, line)) throw std::runtime_error("metrics: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) throw std::runtime_error("metrics: unexpected header");
  MetricsSummary s;
  std::size_t line_no = 1;
  double raw = 0.0;
  double culled = 0.0;
  while (std::getline(csv, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    if (!rest.empty() && rest.back() == '\r') rest.remove_suffix(1);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1)) {
      cols.push_back(rest.substr(0, pos));
    }
    cols.push_back(rest);
    if (cols.size() != 9) throw std::runtime_error("metrics line " + std::to_string(line_no) + ": expected 9 columns");
    const int frame = parse_token<int>(cols[0], "frame id", line_no);
    raw += parse_token<double>(cols[1], "raw_edges", line_no);
    culled += parse_token<double>(cols[2], "culled", line_no);
    const long dim = parse_token<long>(cols[8], "dimensionality", line_no);
    if (s.frames == 0) s.first_dimensionality = dim;
    s.last_dimensionality = dim;
    if (s.frames == 0 || dim > s.peak_dimensionality) {
      s.peak_dimensionality = dim;
      s.peak_frame = frame;
    }
    ++s.frames;
  }
  if (s.frames > 0) {
    s.mean_raw = raw / static_cast<double>(s.frames);
    s.mean_culled = culled / static_cast<double>(s.frames);
  }
  return s;
}

namespace {

using Color = std::array<std::uint8_t, 3>;

void draw_cross(RgbImage& img, const PixelPoint& p, int r, Color c) {
  const int x = static_cast<int>(std::lround(p.x()));
  const int y = static_cast<int>(std::lround(p.y()));
  for (int d = -r; d <= r; ++d) {
    img.set(x + d, y, c);
    img.set(x, y + d, c);
  }
}

void draw_ring(RgbImage& img, const PixelPoint& center, double radius, Color c, bool dashed) {
  const int steps = std::max(16, static_cast<int>(2.0 * std::numbers::pi * radius));
  for (int i = 0; i < steps; ++i) {
    if (dashed && (i / 4) % 2 == 1) continue;
    const double a = 2.0 * std::numbers::pi * i / steps;
    img.set(static_cast<int>(std::lround(center.x() + radius * std::cos(a))),
            static_cast<int>(std::lround(center.y() + radius * std::sin(a))), c);
  }
}

void draw_rect(RgbImage& img, const PixelPoint& center, const Vector2d& half, Color c) {
  const int x0 = static_cast<int>(std::lround(center.x() - half.x()));
  const int x1 = static_cast<int>(std::lround(center.x() + half.x()));
  const int y0 = static_cast<int>(std::lround(center.y() - half.y()));
  const int y1 = static_cast<int>(std::lround(center.y() + half.y()));
  for (int x = x0; x <= x1; ++x) {
    img.set(x, y0, c);
    img.set(x, y1, c);
  }
  for (int y = y0; y <= y1; ++y) {
    img.set(x0, y, c);
    img.set(x1, y, c);
  }
}

}  // namespace

RgbImage render_overlay(const FrameGeometry& frame, const std::vector<EdgePoint>& edges,
                        const std::vector<char>& culled_mask, const FilterState& state) {
  RgbImage img(frame.width, frame.height);
  for (const auto& r : state.regions) {
    if (r.type == RegionType::Circle) draw_ring(img, r.location, r.extent.x(), {40, 80, 255}, false);
    if (r.type == RegionType::Rectangle) draw_rect(img, r.location, r.extent, {40, 80, 255});
  }
  for (const auto& c : state.circles.normals) draw_ring(img, c.center, c.radius, {0, 200, 200}, false);
  for (const auto& c : state.circles.rebels) draw_ring(img, c.center, c.radius, {255, 220, 0}, true);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const bool culled = i < culled_mask.size() && culled_mask[i];
    const Color c = culled ? Color{255, 0, 0} : Color{255, 255, 255};
    img.set(static_cast<int>(std::lround(edges[i].location.x())), static_cast<int>(std::lround(edges[i].location.y())),
            c);
  }
  for (const auto& e : state.edges.normals) draw_cross(img, e.location, 1, {0, 255, 0});
  for (const auto& e : state.edges.rebels) draw_cross(img, e.location, 3, {255, 0, 255});
  return img;
}

void write_trust_record(std::ostream& out, const TrustRecord& r) {
  out << r.frame_id << ' ' << to_string(r.kind) << ' ' << r.entity_id << ' ' << to_string(r.event) << ' '
      << format_number(r.delta) << ' ' << format_number(r.trust_after) << '\n';
}

std::vector<FrameReport> run_pipeline(const std::vector<EdgeFrame>& frames, const std::vector<EgoRecord>& ego,
                                      const RunConfig& config, FilterState& state, const RunOutputs& outputs,
                                      TrustLog* log) {
  if (frames.size() != ego.size()) {
    throw std::runtime_error("frame count mismatch: " + std::to_string(frames.size()) + " edge frames, " +
                             std::to_string(ego.size()) + " ego records");
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].frame_id != ego[i].frame_id) {
      throw std::runtime_error("frame id mismatch at record " + std::to_string(i + 1) + ": edges " +
                               std::to_string(frames[i].frame_id) + ", ego " + std::to_string(ego[i].frame_id));
    }
  }
  config.validate();
  if (outputs.overlay_dir) std::filesystem::create_directories(*outputs.overlay_dir);
  if (outputs.metrics) *outputs.metrics << kMetricsHeader << '\n';

  TrustLog local;
  TrustLog* sink = log ? log : (outputs.trust_log ? &local : nullptr);
  std::vector<FrameReport> reports;
  reports.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (f.frame_id <= state.frame_id) continue;  // already covered by a loaded state
    FrameInput input{f.frame_id, f.timestamp, {}, ego[i].speed, ego[i].distance};
    input.edges.reserve(f.points.size());
    for (const auto& p : f.points) input.edges.push_back(EdgePoint{p, f.frame_id, f.timestamp});

    const std::size_t before = sink ? sink->size() : 0;
    FrameReport rep = process_frame(state, input, config, sink);
    if (outputs.trust_log && sink) {
      for (std::size_t k = before; k < sink->size(); ++k) write_trust_record(*outputs.trust_log, (*sink)[k]);
    }
    if (sink == &local) local.clear();
    if (outputs.metrics) *outputs.metrics << metrics_row(rep) << '\n';
    if (outputs.overlay_dir) {
      char name[32];
      std::snprintf(name, sizeof name, "overlay_%05d.ppm", f.frame_id);
      write_ppm(*outputs.overlay_dir / name, render_overlay(config.frame, input.edges, rep.culled_mask, state));
    }
    if (outputs.dump_at && outputs.dump_path && *outputs.dump_at == f.frame_id) {
      std::ofstream out(*outputs.dump_path);
      if (!out) throw std::runtime_error("cannot write " + outputs.dump_path->string());
      out << serialize_state(state);
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

namespace {

double to_double(const std::string& key, const std::string& value) {
  return parse_token<double>(value, key.c_str(), 0);
}

int to_int(const std::string& key, const std::string& value) { return parse_token<int>(value, key.c_str(), 0); }

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw std::runtime_error("config: '" + key + "' expects a boolean");
}

}  // namespace

void apply_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  using Setter = std::function<void(RunConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters{
      {"tr-s", [](RunConfig& c, const std::string& v) { c.trust.standard = to_double("tr-s", v); }},
      {"tr-cr", [](RunConfig& c, const std::string& v) { c.trust.critical = to_double("tr-cr", v); }},
      {"tr-max", [](RunConfig& c, const std::string& v) { c.trust.maximum = to_double("tr-max", v); }},
      {"error-span", [](RunConfig& c, const std::string& v) { c.error_span = to_double("error-span", v); }},
      {"boundary", [](RunConfig& c, const std::string& v) { c.initial_boundary = to_double("boundary", v); }},
      {"rebel-radius", [](RunConfig& c, const std::string& v) { c.rebel_radius = to_double("rebel-radius", v); }},
      {"rebel-max-deviation",
       [](RunConfig& c, const std::string& v) { c.rebel_max_deviation = to_double("rebel-max-deviation", v); }},
      {"fast-threshold", [](RunConfig& c, const std::string& v) { c.fast_threshold = to_int("fast-threshold", v); }},
      {"fast-nonmax", [](RunConfig& c, const std::string& v) { c.fast_nonmax = to_bool("fast-nonmax", v); }},
      {"eps-beta-group", [](RunConfig& c, const std::string& v) { c.eps_beta_group = to_double("eps-beta-group", v); }},
      {"eps-v-group", [](RunConfig& c, const std::string& v) { c.eps_v_group = to_double("eps-v-group", v); }},
      {"eps-beta-match", [](RunConfig& c, const std::string& v) { c.eps_beta_match = to_double("eps-beta-match", v); }},
      {"eps-v-match", [](RunConfig& c, const std::string& v) { c.eps_v_match = to_double("eps-v-match", v); }},
      {"eps-beta-rebel-group",
       [](RunConfig& c, const std::string& v) { c.eps_beta_rebel_group = to_double("eps-beta-rebel-group", v); }},
      {"eps-v-rebel-group",
       [](RunConfig& c, const std::string& v) { c.eps_v_rebel_group = to_double("eps-v-rebel-group", v); }},
      {"eps-beta-rebel-match",
       [](RunConfig& c, const std::string& v) { c.eps_beta_rebel_match = to_double("eps-beta-rebel-match", v); }},
      {"eps-v-rebel-match",
       [](RunConfig& c, const std::string& v) { c.eps_v_rebel_match = to_double("eps-v-rebel-match", v); }},
      {"involvement", [](RunConfig& c, const std::string& v) { c.involvement = to_double("involvement", v); }},
      {"psi-lifetime", [](RunConfig& c, const std::string& v) { c.psi_lifetime = to_int("psi-lifetime", v); }},
      {"pixels-per-unit",
       [](RunConfig& c, const std::string& v) { c.pixels_per_unit = to_double("pixels-per-unit", v); }},
      {"frame-interval", [](RunConfig& c, const std::string& v) { c.frame_interval = to_double("frame-interval", v); }},
      {"literal-mean",
       [](RunConfig& c, const std::string& v) {
         c.mean_rule = to_bool("literal-mean", v) ? MeanRule::Literal : MeanRule::Ordinary;
       }},
      {"width", [](RunConfig& c, const std::string& v) { c.frame.width = to_int("width", v); }},
      {"height", [](RunConfig& c, const std::string& v) { c.frame.height = to_int("height", v); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw std::runtime_error("config: unknown key '" + key + "'");
  it->second(c, value);
}

void apply_config_file(const std::filesystem::path& path, RunConfig& config) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace lc
