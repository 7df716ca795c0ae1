#pragma once

#include <map>
#include <optional>
#include <string>

#include "roomsg/metrics.hpp"
#include "roomsg/scene_graph.hpp"
#include "roomsg/simulator.hpp"
#include "roomsg/trajectory.hpp"

namespace roomsg {

struct EvalConfig {
  double ate_max_dt = 0.02;
  double chamfer_truncation = 0.0;  // 0 = untruncated
  double pr_match_radius = 0.1;     // correspondence radius for room P/R
  double room_crop_margin = 0.5;    // box inflation when cropping per room
};

// Aggregated metrics of one pipeline run. Rooms whose reconstruction failed
// carry no chamfer value (rendered as X).
struct RunReport {
  std::map<std::string, double> ate;  // alignment mode -> meters
  std::map<int, std::optional<double>> per_room_chamfer;
  std::map<int, int> room_gt_match;   // graph room id -> ground-truth room id
  std::optional<double> room_precision;
  std::optional<double> room_recall;
  std::map<std::string, double> stage_timings;  // seconds
  int rooms = 0;
  int objects = 0;
  int edges = 0;
  int loop_closures_accepted = 0;
  std::vector<std::string> notes;  // omitted metrics etc.
};

// Precision/recall of a predicted room labeling against ground truth, with
// nearest-neighbor correspondence within match_radius. Precision is the mean
// over predicted rooms of the largest fraction of a room's matched points
// falling into a single ground-truth room; recall is the same quantity with
// the roles swapped. Throws InsufficientOverlapError when nothing matches.
std::pair<double, double> room_segmentation_pr(const PointCloud& predicted,
                                               const PointCloud& gt,
                                               double match_radius = 0.1);

// Assembles the full report: ATE under all alignments, per-room chamfer
// after per-room Sim(3) ICP alignment against the matched ground-truth room,
// room P/R, graph counts, and the provided stage timings. Metrics whose
// inputs are missing are omitted with a note.
RunReport evaluate_run(const SceneGraph& graph, const Trajectory& est_trajectory,
                       const World& world, const Trajectory& gt_trajectory,
                       const std::map<std::string, double>& stage_timings,
                       int loop_closures_accepted, const EvalConfig& config = {});

std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& text);
std::string format_report_table(const RunReport& report);
std::string report_to_csv(const RunReport& report);

}  // namespace roomsg
