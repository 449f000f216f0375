#include "lc/io.hpp"
#include "lc/simulator.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<lc::EdgeFrame> detect_directory(const fs::path& dir, const lc::FastOptions& opts, double frame_rate) {
  std::vector<lc::EdgeFrame> frames;
  const auto files = list_images(dir);
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto img = lc::read_pgm(files[i]);
    lc::EdgeFrame f{static_cast<int>(i + 1), static_cast<double>(i) / frame_rate, {}};
    for (const auto& c : lc::detect_fast9(img, opts)) f.points.emplace_back(c.x, c.y);
    frames.push_back(std::move(f));
  }
  return frames;
}

void add_run_config_flags(CLI::App& cmd, lc::RunConfig& c) {
  cmd.add_option("--tr-s", c.trust.standard, "Standard trust")->capture_default_str();
  cmd.add_option("--tr-cr", c.trust.critical, "Critical trust (deletion floor)")->capture_default_str();
  cmd.add_option("--tr-max", c.trust.maximum, "Maximum trust")->capture_default_str();
  cmd.add_option("--error-span", c.error_span, "Rotational error span, pixels")->capture_default_str();
  cmd.add_option("--boundary", c.initial_boundary, "Initial boundary layer / size, pixels")->capture_default_str();
  cmd.add_option("--rebel-radius", c.rebel_radius, "Rebel detection radius, pixels")->capture_default_str();
  cmd.add_option("--rebel-max-deviation", c.rebel_max_deviation, "Rebel chain turn limit, degrees")
      ->capture_default_str();
  cmd.add_option("--fast-threshold", c.fast_threshold, "FAST intensity threshold")->capture_default_str();
  cmd.add_option("--fast-nonmax", c.fast_nonmax, "FAST non-maximum suppression")->capture_default_str();
  cmd.add_option("--eps-beta-group", c.eps_beta_group, "Normal grouping angle window")->capture_default_str();
  cmd.add_option("--eps-v-group", c.eps_v_group, "Normal grouping speed window")->capture_default_str();
  cmd.add_option("--eps-beta-match", c.eps_beta_match, "Normal circle match angle window")->capture_default_str();
  cmd.add_option("--eps-v-match", c.eps_v_match, "Normal circle match speed bound")->capture_default_str();
  cmd.add_option("--eps-beta-rebel-group", c.eps_beta_rebel_group, "Rebel grouping angle window")
      ->capture_default_str();
  cmd.add_option("--eps-v-rebel-group", c.eps_v_rebel_group, "Rebel grouping speed window")->capture_default_str();
  cmd.add_option("--eps-beta-rebel-match", c.eps_beta_rebel_match, "Rebel circle match angle window")
      ->capture_default_str();
  cmd.add_option("--eps-v-rebel-match", c.eps_v_rebel_match, "Rebel circle match speed factor")
      ->capture_default_str();
  cmd.add_option("--involvement", c.involvement, "Circle involvement fraction")->capture_default_str();
  cmd.add_option("--psi-lifetime", c.psi_lifetime, "Ignore region lifetime, frames")->capture_default_str();
  cmd.add_option("--pixels-per-unit", c.pixels_per_unit, "Pixels per unit of ego distance")->capture_default_str();
  cmd.add_option("--frame-interval", c.frame_interval, "Interval assumed before the first frame, seconds")
      ->capture_default_str();
  cmd.add_flag_function(
      "--literal-mean",
      [&c](std::int64_t n) { c.mean_rule = n > 0 ? lc::MeanRule::Literal : lc::MeanRule::Ordinary; },
      "Circle group means divide by M + 1 instead of M");
  cmd.add_option("--width", c.frame.width, "Frame width")->capture_default_str();
  cmd.add_option("--height", c.frame.height, "Frame height")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Line-Circle geometric edge filter"};
  app.require_subcommand(1);

  // simulate
  lc::SimConfig sim;
  fs::path sim_out = "sim";
  bool sim_render = false;
  bool sim_crossing = false;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic forward-motion sequence");
  simulate->add_option("-o,--out-dir", sim_out, "Output directory")->capture_default_str();
  simulate->add_option("--frames", sim.frame_count, "Number of frames")->capture_default_str();
  simulate->add_option("--landmarks", sim.landmark_count, "Static landmarks in view")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--ego-speed", sim.ego_speed, "Camera speed, m/s")->capture_default_str();
  simulate->add_option("--ego-accel", sim.ego_acceleration, "Camera acceleration, m/s^2")->capture_default_str();
  simulate->add_option("--frame-rate", sim.frame_rate, "Frames per second")->capture_default_str();
  simulate->add_option("--focal", sim.focal_length, "Focal length, pixels")->capture_default_str();
  simulate->add_option("--pixel-noise", sim.pixel_noise_sigma, "Per-edge Gaussian noise, pixels")
      ->capture_default_str();
  simulate->add_option("--rotation-noise", sim.rotational_error_sigma, "Per-frame global shift noise, pixels")
      ->capture_default_str();
  simulate->add_flag("--crossing", sim_crossing, "Inject a box crossing the view laterally");
  simulate->add_flag("--render", sim_render, "Also write PGM frames");

  // detect
  fs::path det_images;
  fs::path det_out = "edges.txt";
  lc::FastOptions det_opts;
  double det_rate = 1.0;
  auto* detect = app.add_subcommand("detect", "Run FAST9 over a directory of PGM frames");
  detect->add_option("images", det_images, "Directory of .pgm frames, processed in name order")->required();
  detect->add_option("-o,--out", det_out, "Edge stream output")->capture_default_str();
  detect->add_option("--threshold", det_opts.threshold, "FAST threshold")->capture_default_str();
  detect->add_option("--nonmax", det_opts.nonmax_suppression, "Non-maximum suppression")->capture_default_str();
  detect->add_option("--frame-rate", det_rate, "Frames per second for timestamps")->capture_default_str();

  // run
  lc::RunConfig cfg;
  fs::path run_edges, run_images, run_ego, run_metrics = "metrics.csv", run_log, run_overlays, run_config;
  fs::path dump_path, load_path;
  int dump_at = -1;
  double run_rate = 1.0;
  auto* run = app.add_subcommand("run", "Run the filter over an edge stream or image directory");
  auto* edges_opt = run->add_option("--edges", run_edges, "Edge stream input");
  run->add_option("--images", run_images, "PGM directory input (FAST9 applied)")->excludes(edges_opt);
  run->add_option("--ego", run_ego, "Ego log")->required();
  run->add_option("--metrics", run_metrics, "Metrics CSV output")->capture_default_str();
  run->add_option("--log", run_log, "Trust event log output");
  run->add_option("--overlays", run_overlays, "Directory for PPM overlays");
  run->add_option("--config", run_config, "key = value file; its entries override flags");
  run->add_option("--dump-state", dump_path, "Write the filter state after --dump-at (default: last frame)");
  run->add_option("--dump-at", dump_at, "Frame id at which to dump the state");
  run->add_option("--load-state", load_path, "Resume from a dumped state; earlier frames are skipped");
  run->add_option("--frame-rate", run_rate, "Frames per second when reading images")->capture_default_str();
  add_run_config_flags(*run, cfg);

  // metrics
  fs::path met_in;
  auto* metrics = app.add_subcommand("metrics", "Summarize a metrics CSV");
  metrics->add_option("csv", met_in, "Metrics file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      std::vector<lc::WorldPoint> movers;
      if (sim_crossing) {
        movers = lc::box_object(lc::Vector3d(-2.0, -0.5, 8.0), 0.25, 0.25, lc::Vector3d(0.3, 0.0, 0.0));
      }
      const auto seq = lc::generate_sequence(sim, movers);
      fs::create_directories(sim_out);
      std::vector<lc::EdgeFrame> edges;
      std::vector<lc::EgoRecord> ego;
      for (const auto& f : seq) {
        edges.push_back(lc::to_edge_frame(f));
        ego.push_back(lc::to_ego_record(f));
        if (sim_render) {
          char name[32];
          std::snprintf(name, sizeof name, "frame_%05d.pgm", f.frame_id);
          fs::create_directories(sim_out / "frames");
          lc::write_pgm(sim_out / "frames" / name, lc::render_frame(f, sim.frame));
        }
      }
      auto eout = open_output(sim_out / "edges.txt");
      lc::write_edge_stream(eout, edges);
      auto gout = open_output(sim_out / "ego.txt");
      lc::write_ego_log(gout, ego);
      std::cout << "wrote " << seq.size() << " frames to " << sim_out.string() << "\n";
    } else if (detect->parsed()) {
      const auto frames = detect_directory(det_images, det_opts, det_rate);
      auto out = open_output(det_out);
      lc::write_edge_stream(out, frames);
      std::cout << "wrote " << frames.size() << " frames to " << det_out.string() << "\n";
    } else if (run->parsed()) {
      if (!run_config.empty()) lc::apply_config_file(run_config, cfg);
      cfg.validate();
      std::vector<lc::EdgeFrame> frames;
      if (!run_images.empty()) {
        frames = detect_directory(run_images, lc::FastOptions{cfg.fast_threshold, cfg.fast_nonmax}, run_rate);
      } else if (!run_edges.empty()) {
        frames = lc::read_edge_stream(run_edges);
      } else {
        throw std::runtime_error("run needs --edges or --images");
      }
      const auto ego = lc::read_ego_log(run_ego);

      lc::FilterState state;
      if (!load_path.empty()) {
        std::ifstream in(load_path);
        if (!in) throw std::runtime_error("cannot open " + load_path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        state = lc::deserialize_state(ss.str());
      }
      auto mout = open_output(run_metrics);
      std::ofstream lout;
      lc::RunOutputs outputs;
      outputs.metrics = &mout;
      if (!run_log.empty()) {
        lout = open_output(run_log);
        outputs.trust_log = &lout;
      }
      if (!run_overlays.empty()) outputs.overlay_dir = run_overlays;
      if (!dump_path.empty()) {
        outputs.dump_path = dump_path;
        outputs.dump_at = dump_at >= 0 ? dump_at : (frames.empty() ? 0 : frames.back().frame_id);
      }
      const auto reports = lc::run_pipeline(frames, ego, cfg, state, outputs);
      std::cout << "processed " << reports.size() << " frames, final dimensionality "
                << lc::compute_dimensionality(state) << "\n";
    } else if (metrics->parsed()) {
      std::ifstream in(met_in);
      if (!in) throw std::runtime_error("cannot open " + met_in.string());
      const auto s = lc::summarize_metrics(in);
      std::cout << "frames " << s.frames << "\n"
                << "mean raw edges " << lc::format_number(s.mean_raw) << "\n"
                << "mean culled edges " << lc::format_number(s.mean_culled) << "\n"
                << "dimensionality first " << s.first_dimensionality << " last " << s.last_dimensionality
                << " peak " << s.peak_dimensionality << " (frame " << s.peak_frame << ")\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
