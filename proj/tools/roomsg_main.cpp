#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "roomsg/config.hpp"
#include "roomsg/io.hpp"
#include "roomsg/oracle.hpp"
#include "roomsg/pipeline.hpp"
#include "roomsg/scene_graph_io.hpp"

namespace fs = std::filesystem;
using namespace roomsg;

namespace {

PipelineConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return PipelineConfig{};
  return load_config(path);
}

std::vector<int> default_visit_order(int n_rooms) {
  std::vector<int> order(n_rooms);
  for (int i = 0; i < n_rooms; ++i) order[i] = i;
  return order;
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed,
                 const std::string& out_dir) {
  PipelineConfig config = load_config_or_default(config_path);
  fs::create_directories(out_dir);

  const World world = generate_world(config.world, seed);
  SequenceSpec spec = config.sequence;
  spec.rng_seed = seed;
  if (spec.visit_order.empty()) {
    spec.visit_order = default_visit_order(config.world.n_rooms);
  }
  const SimulatedSequence seq = generate_sequence(world, spec);

  write_world(fs::path(out_dir) / "world.json", world);
  write_feature_file(fs::path(out_dir) / "features.bin", seq.frames);
  write_tum_trajectory(fs::path(out_dir) / "groundtruth.tum", seq.gt_trajectory);
  write_ply(fs::path(out_dir) / "gt_cloud.ply", world.ground_truth_cloud());
  write_tracklets(fs::path(out_dir) / "tracklets.json", seq.tracklets);
  {
    nlohmann::json meta;
    meta["visit_order"] = spec.visit_order;
    meta["connector_traversals"] = seq.connector_traversals;
    meta["frame_count"] = seq.frames.size();
    meta["seed"] = seed;
    std::ofstream out(fs::path(out_dir) / "sequence_meta.json");
    out << meta.dump(2) << "\n";
  }
  std::cerr << "simulated " << seq.frames.size() << " frames across "
            << world.rooms.size() << " rooms into " << out_dir << "\n";
  return 0;
}

std::vector<FrameRecord> load_frames_with_gt(const fs::path& input_dir,
                                             bool require_gt) {
  auto frames = read_feature_file(input_dir / "features.bin");
  const auto gt_path = input_dir / "groundtruth.tum";
  if (fs::exists(gt_path)) {
    const Trajectory gt = read_tum_trajectory(gt_path);
    if (gt.size() == frames.size()) {
      for (std::size_t i = 0; i < frames.size(); ++i) {
        frames[i].gt_pose = gt.samples[i].pose;
      }
    } else if (require_gt) {
      throw InvalidInputError("groundtruth.tum pose count (" +
                              std::to_string(gt.size()) +
                              ") does not match feature file (" +
                              std::to_string(frames.size()) + ")");
    }
  } else if (require_gt) {
    throw InvalidInputError("missing " + gt_path.string() +
                            " (the oracle provider needs ground truth)");
  }
  return frames;
}

int cmd_run(const std::string& config_path, const std::string& input_dir,
            const std::string& out_dir, const std::string& replay_dir) {
  PipelineConfig config = load_config_or_default(config_path);
  const fs::path in(input_dir);
  fs::create_directories(out_dir);

  const bool use_replay = !replay_dir.empty();
  const auto frames = load_frames_with_gt(in, /*require_gt=*/!use_replay);

  std::unique_ptr<ReconstructionProvider> provider;
  World world;
  bool have_world = false;
  if (fs::exists(in / "world.json")) {
    world = read_world(in / "world.json");
    have_world = true;
  }
  if (use_replay) {
    provider = std::make_unique<ReplayProvider>(replay_dir);
  } else {
    if (!have_world) {
      throw InvalidInputError("missing " + (in / "world.json").string());
    }
    provider = std::make_unique<OracleProvider>(world, frames, config.oracle);
  }

  PipelineInput input;
  input.frames = frames;
  if (have_world) {
    input.cues = world.cue_set();
  } else {
    throw InvalidInputError("run: no cue source; world.json is required");
  }
  if (config.pipeline.enable_objects && fs::exists(in / "tracklets.json")) {
    input.tracklets = read_tracklets(in / "tracklets.json");
  }

  const PipelineResult result = run_pipeline(config, input, *provider);

  save_scene_graph(result.graph, out_dir);
  write_tum_trajectory(fs::path(out_dir) / "trajectory.tum", result.trajectory);
  {
    std::ofstream out(fs::path(out_dir) / "config_used.json");
    out << config_to_json(config);
  }

  RunReport report;
  if (have_world && fs::exists(in / "groundtruth.tum")) {
    const Trajectory gt = read_tum_trajectory(in / "groundtruth.tum");
    report = evaluate_run(result.graph, result.trajectory, world, gt,
                          result.stage_timings, result.loop_closures_accepted,
                          config.eval);
  } else {
    report.stage_timings = result.stage_timings;
    report.rooms = static_cast<int>(result.graph.rooms().size());
    report.objects = static_cast<int>(result.graph.objects().size());
    report.edges = static_cast<int>(result.graph.room_edges().size());
    report.loop_closures_accepted = result.loop_closures_accepted;
    report.notes.push_back("metrics omitted: no ground truth in input directory");
  }
  {
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << report_to_json(report);
  }
  for (const auto& err : result.errors) std::cerr << "warning: " << err << "\n";
  std::cerr << "pipeline done: " << result.graph.rooms().size() << " rooms, "
            << result.graph.objects().size() << " objects, "
            << result.graph.room_edges().size() << " edges\n";
  return 0;
}

int cmd_eval(const std::string& run_dir, const std::string& gt_dir, bool csv) {
  const SceneGraph graph = load_scene_graph(run_dir);
  const Trajectory est = read_tum_trajectory(fs::path(run_dir) / "trajectory.tum");
  const World world = read_world(fs::path(gt_dir) / "world.json");
  const Trajectory gt = read_tum_trajectory(fs::path(gt_dir) / "groundtruth.tum");

  std::map<std::string, double> timings;
  int loop_closures = 0;
  const auto prior_report = fs::path(run_dir) / "report.json";
  if (fs::exists(prior_report)) {
    std::ifstream in(prior_report);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    const RunReport prior = report_from_json(text);
    timings = prior.stage_timings;
    loop_closures = prior.loop_closures_accepted;
  }

  EvalConfig eval_config;
  const auto config_used = fs::path(run_dir) / "config_used.json";
  if (fs::exists(config_used)) {
    eval_config = load_config(config_used, /*apply_env_overrides=*/false).eval;
  }

  const RunReport report =
      evaluate_run(graph, est, world, gt, timings, loop_closures, eval_config);
  {
    std::ofstream out(fs::path(run_dir) / "eval_report.json");
    out << report_to_json(report);
  }
  if (csv) {
    std::cout << report_to_csv(report);
  } else {
    std::cout << format_report_table(report);
  }
  return 0;
}

int cmd_export(const std::string& run_dir, const std::string& format,
               std::string out_file) {
  SceneGraph graph = load_scene_graph(run_dir);
  if (format == "ply") {
    if (out_file.empty()) out_file = (fs::path(run_dir) / "export.ply").string();
    PointCloud merged;
    for (const auto& [room_id, node] : graph.rooms()) {
      if (!node.valid) continue;
      const PointCloud world_cloud =
          transform_points(node.reference_pose, node.point_cloud);
      for (const auto& p : world_cloud.points) merged.add(p, room_id);
    }
    write_ply(out_file, merged);
  } else if (format == "g2o") {
    if (out_file.empty()) out_file = (fs::path(run_dir) / "export.g2o").string();
    const auto view = room_pose_graph_view(graph);
    write_g2o(out_file, view);
  } else {
    std::cerr << "error: unknown export format `" << format << "`\n";
    return 1;
  }
  std::cerr << "exported " << out_file << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Room-level Sim(3) scene-graph SLAM back-end"};
  app.require_subcommand(1);

  std::string config_path, input_dir, out_dir, run_dir, gt_dir, format, replay_dir,
      out_file;
  std::uint64_t seed = 1;
  bool csv = false;

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic sequence");
  simulate->add_option("--config", config_path, "Pipeline config (JSON)");
  simulate->add_option("--seed", seed, "World and sequence seed");
  simulate->add_option("--out", out_dir, "Output directory")->required();

  auto* run = app.add_subcommand("run", "Run the pipeline on a sequence");
  run->add_option("--config", config_path, "Pipeline config (JSON)");
  run->add_option("--input", input_dir, "Input directory (simulate output)")
      ->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--replay", replay_dir,
                  "Replay precomputed reconstructions from this directory");

  auto* eval = app.add_subcommand("eval", "Evaluate a run against ground truth");
  eval->add_option("--run", run_dir, "Run output directory")->required();
  eval->add_option("--gt", gt_dir, "Ground-truth directory (simulate output)")
      ->required();
  eval->add_flag("--csv", csv, "Emit one CSV row per room");

  auto* exp = app.add_subcommand("export", "Export run artifacts");
  exp->add_option("--run", run_dir, "Run output directory")->required();
  exp->add_option("--format", format, "ply or g2o")->required();
  exp->add_option("--out", out_file, "Output file (default inside run dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);  // usage errors exit 1, --help exits 0
  }

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, seed, out_dir);
    if (run->parsed()) {
      if (!fs::is_directory(input_dir)) {
        std::cerr << "error: input directory not found: " << input_dir << "\n"
                  << run->help();
        return 1;
      }
      return cmd_run(config_path, input_dir, out_dir, replay_dir);
    }
    if (eval->parsed()) {
      if (!fs::is_directory(run_dir) || !fs::is_directory(gt_dir)) {
        std::cerr << "error: run/gt directory not found\n" << eval->help();
        return 1;
      }
      return cmd_eval(run_dir, gt_dir, csv);
    }
    if (exp->parsed()) {
      if (!fs::is_directory(run_dir)) {
        std::cerr << "error: run directory not found: " << run_dir << "\n"
                  << exp->help();
        return 1;
      }
      return cmd_export(run_dir, format, out_file);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
