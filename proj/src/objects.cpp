#include "roomsg/objects.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

namespace roomsg {

std::vector<MaskTracklet> merge_tracklets(const std::vector<MaskTracklet>& tracklets,
                                          double iou_threshold) {
  const int n = static_cast<int>(tracklets.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  // Index observations by frame so only co-observed tracklets are compared.
  std::map<int, std::vector<std::pair<int, const MaskObservation*>>> by_frame;
  for (int i = 0; i < n; ++i) {
    for (const auto& obs : tracklets[i].observations) {
      by_frame[obs.frame_id].emplace_back(i, &obs);
    }
  }
  for (const auto& [frame, members] : by_frame) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        if (members[a].first == members[b].first) continue;
        if (mask_iou(members[a].second->mask, members[b].second->mask) >=
            iou_threshold) {
          parent[find(members[a].first)] = find(members[b].first);
        }
      }
    }
  }

  std::map<int, std::vector<int>> groups;  // root -> member indices
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);

  std::vector<MaskTracklet> merged;
  for (const auto& [root, members] : groups) {
    MaskTracklet out;
    out.id = tracklets[members.front()].id;
    for (const int m : members) {
      out.id = std::min(out.id, tracklets[m].id);
      if (out.seed_label.empty()) out.seed_label = tracklets[m].seed_label;
      out.observations.insert(out.observations.end(),
                              tracklets[m].observations.begin(),
                              tracklets[m].observations.end());
    }
    std::sort(out.observations.begin(), out.observations.end(),
              [](const MaskObservation& a, const MaskObservation& b) {
                if (a.frame_id != b.frame_id) return a.frame_id < b.frame_id;
                return a.mask < b.mask;
              });
    merged.push_back(std::move(out));
  }
  std::sort(merged.begin(), merged.end(),
            [](const MaskTracklet& a, const MaskTracklet& b) { return a.id < b.id; });
  return merged;
}

std::optional<LiftedObject> lift_tracklet(const MaskTracklet& tracklet,
                                          const RoomReconstruction& reconstruction,
                                          const ObjectsConfig& config) {
  PointCloud raw;  // room frame, all views
  std::vector<const FeatureVector*> features;
  int views = 0;
  for (const auto& obs : tracklet.observations) {
    const auto pm_it = reconstruction.per_frame_points.find(obs.frame_id);
    const auto pose_it = reconstruction.frame_poses.find(obs.frame_id);
    if (pm_it == reconstruction.per_frame_points.end() ||
        pose_it == reconstruction.frame_poses.end()) {
      continue;  // frame dropped by subsampling
    }
    const FramePointmap& pm = pm_it->second;
    std::unordered_map<int, int> index_of_pixel;
    index_of_pixel.reserve(pm.pixels.size());
    for (std::size_t i = 0; i < pm.pixels.size(); ++i) {
      index_of_pixel.emplace(pm.pixels[i], static_cast<int>(i));
    }
    bool contributed = false;
    for (const int pixel : obs.mask) {
      const auto it = index_of_pixel.find(pixel);
      if (it == index_of_pixel.end()) continue;
      raw.add(pose_it->second * pm.cloud.points[it->second]);
      contributed = true;
    }
    if (contributed) {
      ++views;
      features.push_back(&obs.feature);
    }
  }
  if (views < config.min_views || raw.empty()) return std::nullopt;

  // The pose anchors the raw centroid; fusion happens afterwards so voxel
  // averaging cannot shift the anchor.
  const Eigen::Vector3d center = centroid(raw);
  PointCloud fused = voxel_downsample(raw, config.voxel_size);
  if (static_cast<int>(fused.size()) < config.min_points) return std::nullopt;

  LiftedObject lifted;
  lifted.pose = Sim3::from_translation(center);
  lifted.point_cloud = std::move(fused);
  lifted.label = tracklet.seed_label;
  lifted.support_count = views;

  FeatureVector mean = FeatureVector::Zero(features.front()->size());
  for (const auto* f : features) mean += *f;
  mean /= static_cast<double>(features.size());
  const double norm = mean.norm();
  if (norm < 1e-12) return std::nullopt;  // degenerate opposing features
  lifted.feature = mean / norm;
  return lifted;
}

std::vector<int> populate_room(SceneGraph& graph, int room_id,
                               const std::vector<MaskTracklet>& tracklets,
                               const RoomReconstruction& reconstruction,
                               const ObjectsConfig& config) {
  const RoomNode& room = graph.room(room_id);  // throws LookupError if missing
  if (!room.finalized) {
    throw InvalidInputError("populate_room: room " + std::to_string(room_id) +
                            " is not finalized");
  }
  std::vector<int> created;
  for (const auto& tracklet : merge_tracklets(tracklets, config.iou_threshold)) {
    auto lifted = lift_tracklet(tracklet, reconstruction, config);
    if (!lifted) continue;
    ObjectNode node;
    node.pose_in_room = lifted->pose;
    // Object cloud stored in the object's own frame (centroid at origin).
    const Eigen::Vector3d center = lifted->pose.translation();
    for (const auto& p : lifted->point_cloud.points) {
      node.point_cloud.add(p - center);
    }
    node.feature = lifted->feature;
    node.label = lifted->label;
    node.support_count = lifted->support_count;
    created.push_back(graph.add_object(room_id, std::move(node)));
  }
  return created;
}

}  // namespace roomsg
