#pragma once

#include "lc/fast.hpp"
#include "lc/pipeline.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lc {

// Edge stream: one frame per line, "frame_id timestamp x y x y ...".
struct EdgeFrame {
  int frame_id = 0;
  double timestamp = 0.0;
  std::vector<PixelPoint> points;
};

// Ego log: one frame per line, "frame_id speed distance".
struct EgoRecord {
  int frame_id = 0;
  double speed = 0.0;
  double distance = 0.0;
};

// Shortest round-trip decimal form, independent of the global locale.
std::string format_number(double v);

void write_edge_stream(std::ostream& out, const std::vector<EdgeFrame>& frames);
std::vector<EdgeFrame> read_edge_stream(std::istream& in);
void write_ego_log(std::ostream& out, const std::vector<EgoRecord>& records);
std::vector<EgoRecord> read_ego_log(std::istream& in);

std::vector<EdgeFrame> read_edge_stream(const std::filesystem::path& path);
std::vector<EgoRecord> read_ego_log(const std::filesystem::path& path);

EdgeFrame to_edge_frame(const SimFrame& frame);
EgoRecord to_ego_record(const SimFrame& frame);

inline constexpr const char* kMetricsHeader = "frame_id,raw_edges,culled,n_En,n_Er,n_Cn,n_Cr,n_psi,dimensionality";
std::string metrics_row(const FrameReport& report);

struct MetricsSummary {
  std::size_t frames = 0;
  double mean_raw = 0.0;
  double mean_culled = 0.0;
  long first_dimensionality = 0;
  long last_dimensionality = 0;
  long peak_dimensionality = 0;
  int peak_frame = 0;
};

MetricsSummary summarize_metrics(std::istream& csv);

// Detected edges white, culled edges red, E_n green, E_r magenta, C_n cyan
// rings, C_r yellow dashed rings, psi regions blue outlines.
RgbImage render_overlay(const FrameGeometry& frame, const std::vector<EdgePoint>& edges,
                        const std::vector<char>& culled_mask, const FilterState& state);

struct RunOutputs {
  std::ostream* metrics = nullptr;      // CSV, header written first
  std::ostream* trust_log = nullptr;    // one line per trust event
  std::optional<std::filesystem::path> overlay_dir;
  std::optional<int> dump_at;           // frame id after which the state is dumped
  std::optional<std::filesystem::path> dump_path;
};

// Frames must line up one-to-one with ego records by frame id. Returns the
// per-frame reports; the state is left at the end of the sequence.
std::vector<FrameReport> run_pipeline(const std::vector<EdgeFrame>& frames, const std::vector<EgoRecord>& ego,
                                      const RunConfig& config, FilterState& state, const RunOutputs& outputs,
                                      TrustLog* log = nullptr);

void write_trust_record(std::ostream& out, const TrustRecord& record);

// "key = value" lines, '#' comments. Unknown keys are an error.
void apply_config_file(const std::filesystem::path& path, RunConfig& config);
void apply_config_value(RunConfig& config, const std::string& key, const std::string& value);

}  // namespace lc
