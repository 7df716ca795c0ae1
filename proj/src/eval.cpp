#include "roomsg/eval.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "roomsg/align.hpp"
#include "roomsg/kdtree.hpp"

namespace roomsg {

namespace {

// Mean over source rooms of the max fraction of a room's matched points
// lying in a single target room. Rooms with no matched points score 0.
double directional_room_score(const PointCloud& source, const PointCloud& target,
                              double radius, bool& any_match) {
  if (source.empty() || target.empty() || !source.has_labels() ||
      !target.has_labels()) {
    throw InvalidInputError("room_segmentation_pr: clouds must be non-empty and labeled");
  }
  const KdTree tree(target.points);
  // source label -> (target label -> count)
  std::map<int, std::map<int, int>> votes;
  std::map<int, int> totals;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const int label = source.labels[i];
    totals.try_emplace(label, 0);
    const auto hit = tree.nearest(source.points[i]);
    if (hit.squared_distance > radius * radius) continue;
    ++votes[label][target.labels[hit.index]];
    ++totals[label];
  }
  double sum = 0.0;
  int room_count = 0;
  for (const auto& [label, total] : totals) {
    ++room_count;
    if (total == 0) continue;  // fully unmatched room scores 0
    any_match = true;
    int best = 0;
    for (const auto& [tl, count] : votes[label]) best = std::max(best, count);
    sum += static_cast<double>(best) / static_cast<double>(total);
  }
  return room_count > 0 ? sum / room_count : 0.0;
}

}  // namespace

std::pair<double, double> room_segmentation_pr(const PointCloud& predicted,
                                               const PointCloud& gt,
                                               double match_radius) {
  bool any_match = false;
  const double precision =
      directional_room_score(predicted, gt, match_radius, any_match);
  const double recall = directional_room_score(gt, predicted, match_radius, any_match);
  if (!any_match) {
    throw InsufficientOverlapError(
        "room_segmentation_pr: no point correspondence within " +
        std::to_string(match_radius) + " m");
  }
  return {precision, recall};
}

RunReport evaluate_run(const SceneGraph& graph, const Trajectory& est_trajectory,
                       const World& world, const Trajectory& gt_trajectory,
                       const std::map<std::string, double>& stage_timings,
                       int loop_closures_accepted, const EvalConfig& config) {
  RunReport report;
  report.stage_timings = stage_timings;
  report.rooms = static_cast<int>(graph.rooms().size());
  report.objects = static_cast<int>(graph.objects().size());
  report.edges = static_cast<int>(graph.room_edges().size());
  report.loop_closures_accepted = loop_closures_accepted;

  // Trajectory error under every alignment mode.
  if (est_trajectory.empty() || gt_trajectory.empty()) {
    report.notes.push_back("ate omitted: empty trajectory");
  } else {
    const std::pair<std::string, AteAlignment> modes[] = {
        {"none", AteAlignment::kNone},
        {"se3", AteAlignment::kSe3},
        {"sim3", AteAlignment::kSim3}};
    for (const auto& [name, mode] : modes) {
      try {
        report.ate[name] =
            ate_rmse(est_trajectory, gt_trajectory, {mode, config.ate_max_dt});
      } catch (const Error& e) {
        report.notes.push_back("ate " + name + " omitted: " + e.what());
      }
    }
  }

  // Per-room chamfer: each valid room's cloud is placed in the world, cropped
  // to its best-overlap ground-truth room, ICP-aligned and scored.
  for (const auto& [room_id, node] : graph.rooms()) {
    if (!node.valid || node.point_cloud.empty()) {
      report.per_room_chamfer[room_id] = std::nullopt;  // rendered as X
      continue;
    }
    const PointCloud world_cloud =
        transform_points(node.reference_pose, node.point_cloud);

    // Vote for the ground-truth room containing most of the cloud.
    std::map<int, int> votes;
    for (const auto& p : world_cloud.points) {
      if (auto room = world.room_containing(p)) ++votes[*room];
    }
    if (votes.empty()) {
      report.per_room_chamfer[room_id] = std::nullopt;
      report.notes.push_back("room " + std::to_string(room_id) +
                             ": no overlap with any ground-truth room");
      continue;
    }
    const int gt_room =
        std::max_element(votes.begin(), votes.end(),
                         [](const auto& a, const auto& b) {
                           return a.second < b.second;
                         })
            ->first;
    report.room_gt_match[room_id] = gt_room;

    const RoomBox& box = world.rooms[gt_room];
    PointCloud cropped;
    for (const auto& p : world_cloud.points) {
      if (p.x() >= box.lo.x() - config.room_crop_margin &&
          p.x() <= box.hi.x() + config.room_crop_margin &&
          p.y() >= box.lo.y() - config.room_crop_margin &&
          p.y() <= box.hi.y() + config.room_crop_margin) {
        cropped.add(p);
      }
    }
    const PointCloud gt_cloud = world.ground_truth_room_cloud(gt_room);
    if (cropped.empty() || gt_cloud.empty()) {
      report.per_room_chamfer[room_id] = std::nullopt;
      continue;
    }
    const Sim3 refined = icp_align(cropped, gt_cloud, Sim3::identity());
    report.per_room_chamfer[room_id] =
        chamfer_distance(transform_points(refined, cropped), gt_cloud,
                         {config.chamfer_truncation});
  }

  // Room segmentation P/R over labeled world-frame clouds. Corridor geometry
  // carries no room label and is excluded from the ground-truth side.
  PointCloud predicted_labeled;
  for (const auto& [room_id, node] : graph.rooms()) {
    if (!node.valid || node.point_cloud.empty()) continue;
    const PointCloud world_cloud =
        transform_points(node.reference_pose, node.point_cloud);
    for (const auto& p : world_cloud.points) predicted_labeled.add(p, room_id);
  }
  PointCloud gt_labeled;
  {
    const PointCloud full = world.ground_truth_cloud();
    for (std::size_t i = 0; i < full.size(); ++i) {
      if (full.labels[i] >= 0) gt_labeled.add(full.points[i], full.labels[i]);
    }
  }
  if (predicted_labeled.empty()) {
    report.notes.push_back("room P/R omitted: no valid room clouds");
  } else {
    try {
      const auto [precision, recall] =
          room_segmentation_pr(predicted_labeled, gt_labeled, config.pr_match_radius);
      report.room_precision = precision;
      report.room_recall = recall;
    } catch (const Error& e) {
      report.notes.push_back(std::string("room P/R omitted: ") + e.what());
    }
  }
  return report;
}

// --- report formatting -------------------------------------------------------

std::string report_to_json(const RunReport& report) {
  nlohmann::json doc;
  doc["ate"] = report.ate;
  nlohmann::json chamfer = nlohmann::json::object();
  for (const auto& [room_id, value] : report.per_room_chamfer) {
    if (value) {
      chamfer[std::to_string(room_id)] = *value;
    } else {
      chamfer[std::to_string(room_id)] = nullptr;  // the X convention
    }
  }
  doc["per_room_chamfer"] = std::move(chamfer);
  nlohmann::json match = nlohmann::json::object();
  for (const auto& [room_id, gt] : report.room_gt_match) {
    match[std::to_string(room_id)] = gt;
  }
  doc["room_gt_match"] = std::move(match);
  if (report.room_precision) doc["room_precision"] = *report.room_precision;
  if (report.room_recall) doc["room_recall"] = *report.room_recall;
  doc["stage_timings"] = report.stage_timings;
  doc["counts"] = {{"rooms", report.rooms},
                   {"objects", report.objects},
                   {"edges", report.edges},
                   {"loop_closures_accepted", report.loop_closures_accepted}};
  doc["notes"] = report.notes;
  return doc.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("run report: ") + e.what());
  }
  RunReport report;
  try {
    for (const auto& [key, value] : doc.at("ate").items()) {
      report.ate[key] = value.get<double>();
    }
    for (const auto& [key, value] : doc.at("per_room_chamfer").items()) {
      report.per_room_chamfer[std::stoi(key)] =
          value.is_null() ? std::nullopt : std::make_optional(value.get<double>());
    }
    for (const auto& [key, value] : doc.at("room_gt_match").items()) {
      report.room_gt_match[std::stoi(key)] = value.get<int>();
    }
    if (doc.contains("room_precision")) {
      report.room_precision = doc["room_precision"].get<double>();
    }
    if (doc.contains("room_recall")) {
      report.room_recall = doc["room_recall"].get<double>();
    }
    for (const auto& [key, value] : doc.at("stage_timings").items()) {
      report.stage_timings[key] = value.get<double>();
    }
    const auto& counts = doc.at("counts");
    report.rooms = counts.at("rooms").get<int>();
    report.objects = counts.at("objects").get<int>();
    report.edges = counts.at("edges").get<int>();
    report.loop_closures_accepted = counts.at("loop_closures_accepted").get<int>();
    for (const auto& n : doc.at("notes")) {
      report.notes.push_back(n.get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("run report: ") + e.what());
  }
  return report;
}

std::string format_report_table(const RunReport& report) {
  std::ostringstream out;
  out << "=== run report ===\n";
  out << "counts: rooms " << report.rooms << ", objects " << report.objects
      << ", edges " << report.edges << ", loop closures "
      << report.loop_closures_accepted << "\n";
  for (const auto& [mode, value] : report.ate) {
    out << "ate[" << mode << "]: " << value << " m\n";
  }
  if (report.room_precision && report.room_recall) {
    out << "room precision/recall: " << *report.room_precision << " / "
        << *report.room_recall << "\n";
  }
  out << "per-room chamfer (m):\n";
  for (const auto& [room_id, value] : report.per_room_chamfer) {
    out << "  room " << room_id;
    const auto match = report.room_gt_match.find(room_id);
    if (match != report.room_gt_match.end()) {
      out << " (gt room " << match->second << ")";
    }
    if (value) {
      out << ": " << *value << "\n";
    } else {
      out << ": X\n";
    }
  }
  if (!report.stage_timings.empty()) {
    out << "stage timings (s):\n";
    for (const auto& [stage, seconds] : report.stage_timings) {
      out << "  " << stage << ": " << seconds << "\n";
    }
  }
  for (const auto& note : report.notes) out << "note: " << note << "\n";
  return out.str();
}

std::string report_to_csv(const RunReport& report) {
  std::ostringstream out;
  out << "room_id,gt_room,chamfer_m,ate_sim3_m,room_precision,room_recall\n";
  const auto ate = report.ate.count("sim3") ? std::to_string(report.ate.at("sim3"))
                                            : std::string();
  const auto precision =
      report.room_precision ? std::to_string(*report.room_precision) : std::string();
  const auto recall =
      report.room_recall ? std::to_string(*report.room_recall) : std::string();
  for (const auto& [room_id, value] : report.per_room_chamfer) {
    const auto match = report.room_gt_match.find(room_id);
    out << room_id << ","
        << (match != report.room_gt_match.end() ? std::to_string(match->second) : "")
        << "," << (value ? std::to_string(*value) : "X") << "," << ate << ","
        << precision << "," << recall << "\n";
  }
  return out.str();
}

}  // namespace roomsg
