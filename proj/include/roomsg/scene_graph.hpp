#pragma once

#include <map>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "roomsg/point_cloud.hpp"
#include "roomsg/sim3.hpp"

namespace roomsg {

using FeatureVector = Eigen::VectorXd;

// A mapped room: its reference pose in the world, the keyframe poses in the
// room's local frame (the anchor frame, first image of the batch, is
// identity), the room point cloud in that same local frame, and the frame
// features used for revisit matching.
struct RoomNode {
  int id = -1;
  Sim3 reference_pose;                    // world <- room frame
  std::map<int, Sim3> local_frame_poses;  // frame id -> room frame <- camera
  std::map<int, double> frame_timestamps; // frame id -> seconds
  PointCloud point_cloud;                 // in the room frame
  std::vector<FeatureVector> frame_features;
  bool finalized = false;
  bool valid = true;  // false when no reconstruction could be recovered
};

struct ObjectNode {
  int id = -1;
  int parent_room = -1;
  Sim3 pose_in_room;       // parent room frame <- object frame
  PointCloud point_cloud;  // in the object frame
  FeatureVector feature;   // unit norm
  std::string label;
  int support_count = 0;   // contributing views
};

enum class RoomEdgeKind { kTransition, kLoopClosure };

// Relative-transform constraint between two rooms. The raw per-pair
// estimates are kept alongside the aggregated consensus so the optimizer can
// use either.
struct RoomEdge {
  int id = -1;
  int room_i = -1;
  int room_j = -1;
  std::vector<Sim3> estimates;  // each maps room_j frame -> room_i frame
  Sim3 consensus;
  RoomEdgeKind kind = RoomEdgeKind::kTransition;
  Matrix7d information = Matrix7d::Identity();
};

// Hierarchical scene graph: room and object nodes, room-to-room constraint
// edges, and room-to-object containment edges (each object has exactly one
// parent room).
class SceneGraph {
 public:
  int add_room(RoomNode node);
  int add_object(int room_id, ObjectNode node);
  int add_room_edge(RoomEdge edge);

  bool has_room(int id) const { return rooms_.count(id) > 0; }
  bool has_object(int id) const { return objects_.count(id) > 0; }

  const RoomNode& room(int id) const;
  RoomNode& room(int id);
  const ObjectNode& object(int id) const;
  ObjectNode& object(int id);
  const RoomEdge& room_edge(int id) const;

  const std::map<int, RoomNode>& rooms() const { return rooms_; }
  const std::map<int, ObjectNode>& objects() const { return objects_; }
  const std::map<int, RoomEdge>& room_edges() const { return room_edges_; }
  const std::set<std::pair<int, int>>& object_edges() const { return object_edges_; }

  // Object ids attached to a room.
  std::vector<int> objects_of_room(int room_id) const;
  // Ids of rooms sharing a room edge with `room_id`.
  std::set<int> neighbors(int room_id) const;
  // Ids of edges incident to a room.
  std::vector<int> edges_of_room(int room_id) const;

  // World pose of an object: room reference pose composed with the object's
  // room-local pose. Objects follow their room; nothing is stored per object
  // in world coordinates.
  Sim3 world_pose_of_object(int object_id) const;

  // Removes a room together with its incident edges and child objects.
  void remove_room(int room_id);

  // Next ids that will be assigned (stable, monotone).
  int next_room_id() const { return next_room_id_; }
  int next_object_id() const { return next_object_id_; }

  // Used by deserialization to restore id counters.
  void set_id_counters(int next_room, int next_object, int next_edge);

 private:
  std::map<int, RoomNode> rooms_;
  std::map<int, ObjectNode> objects_;
  std::map<int, RoomEdge> room_edges_;
  std::set<std::pair<int, int>> object_edges_;  // (room id, object id)
  int next_room_id_ = 0;
  int next_object_id_ = 0;
  int next_edge_id_ = 0;
};

// One optimization factor: a single raw estimate of a room edge.
struct PoseFactor {
  int room_i = -1;
  int room_j = -1;
  Sim3 measurement;  // room_j frame expressed in room_i frame
  Matrix7d information = Matrix7d::Identity();
  RoomEdgeKind kind = RoomEdgeKind::kTransition;
  int edge_id = -1;
};

// Mutable view of the room layer (room nodes and room-to-room edges only).
// Pose writes go straight back to the owning graph; containment edges are
// excluded because they are never optimized.
class RoomPoseGraphView {
 public:
  explicit RoomPoseGraphView(SceneGraph& graph, bool factor_per_estimate = true);

  const std::vector<int>& room_ids() const { return room_ids_; }
  const std::vector<PoseFactor>& factors() const { return factors_; }

  Sim3 pose(int room_id) const { return graph_->room(room_id).reference_pose; }
  void set_pose(int room_id, const Sim3& pose) {
    graph_->room(room_id).reference_pose = pose;
  }

  SceneGraph& graph() { return *graph_; }

 private:
  SceneGraph* graph_;
  std::vector<int> room_ids_;
  std::vector<PoseFactor> factors_;
};

inline RoomPoseGraphView room_pose_graph_view(SceneGraph& graph,
                                              bool factor_per_estimate = true) {
  return RoomPoseGraphView(graph, factor_per_estimate);
}

}  // namespace roomsg
