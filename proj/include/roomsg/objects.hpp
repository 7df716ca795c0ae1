#pragma once

#include <optional>
#include <vector>

#include "roomsg/reconstruction.hpp"
#include "roomsg/scene_graph.hpp"
#include "roomsg/tracklet.hpp"

namespace roomsg {

struct ObjectsConfig {
  double iou_threshold = 0.5;
  int min_views = 2;
  int min_points = 50;
  double voxel_size = 0.02;
};

// A tracklet lifted into 3D, in the parent room's frame. The pose anchors
// the object at its point centroid with identity rotation and unit scale.
struct LiftedObject {
  PointCloud point_cloud;  // room frame, voxel-fused
  Sim3 pose;               // room frame <- object frame
  FeatureVector feature;   // renormalized mean over contributing views
  std::string label;
  int support_count = 0;
};

// Merges tracklets that share a frame with mask IoU above the threshold,
// transitively (union-find): observations are united, features kept
// per-observation. Order-independent; merged tracklets take the smallest
// member id and results are id-sorted.
std::vector<MaskTracklet> merge_tracklets(const std::vector<MaskTracklet>& tracklets,
                                          double iou_threshold);

// Selects the masked pixels' camera-frame points for every observation the
// reconstruction covers, moves them into the room frame via the frame's
// local pose, and fuses them by voxel downsampling. Returns nothing when
// fewer than min_views observations are usable or fewer than min_points
// points survive.
std::optional<LiftedObject> lift_tracklet(const MaskTracklet& tracklet,
                                          const RoomReconstruction& reconstruction,
                                          const ObjectsConfig& config = {});

// Runs the merge + lift pipeline for one finalized room and attaches an
// object node per accepted tracklet. Returns the new object ids.
std::vector<int> populate_room(SceneGraph& graph, int room_id,
                               const std::vector<MaskTracklet>& tracklets,
                               const RoomReconstruction& reconstruction,
                               const ObjectsConfig& config = {});

}  // namespace roomsg
