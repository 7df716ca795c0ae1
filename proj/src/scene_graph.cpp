#include "roomsg/scene_graph.hpp"

#include <algorithm>

namespace roomsg {

int SceneGraph::add_room(RoomNode node) {
  if (node.id < 0) {
    node.id = next_room_id_;
  } else if (rooms_.count(node.id)) {
    throw StructuralError("add_room: duplicate room id " + std::to_string(node.id));
  }
  next_room_id_ = std::max(next_room_id_, node.id + 1);
  const int id = node.id;
  rooms_.emplace(id, std::move(node));
  return id;
}

int SceneGraph::add_object(int room_id, ObjectNode node) {
  if (!rooms_.count(room_id)) {
    throw StructuralError("add_object: unknown room id " + std::to_string(room_id));
  }
  if (node.id < 0) {
    node.id = next_object_id_;
  } else if (objects_.count(node.id)) {
    throw StructuralError("add_object: duplicate object id " +
                          std::to_string(node.id));
  }
  next_object_id_ = std::max(next_object_id_, node.id + 1);
  node.parent_room = room_id;
  const int id = node.id;
  objects_.emplace(id, std::move(node));
  object_edges_.emplace(room_id, id);
  return id;
}

int SceneGraph::add_room_edge(RoomEdge edge) {
  if (edge.room_i == edge.room_j) {
    throw StructuralError("add_room_edge: self edge on room " +
                          std::to_string(edge.room_i));
  }
  if (!rooms_.count(edge.room_i) || !rooms_.count(edge.room_j)) {
    throw StructuralError("add_room_edge: unknown room pair (" +
                          std::to_string(edge.room_i) + ", " +
                          std::to_string(edge.room_j) + ")");
  }
  if (edge.estimates.empty()) {
    throw StructuralError("add_room_edge: edge without estimates");
  }
  if (edge.id < 0) {
    edge.id = next_edge_id_;
  } else if (room_edges_.count(edge.id)) {
    throw StructuralError("add_room_edge: duplicate edge id " +
                          std::to_string(edge.id));
  }
  next_edge_id_ = std::max(next_edge_id_, edge.id + 1);
  const int id = edge.id;
  room_edges_.emplace(id, std::move(edge));
  return id;
}

const RoomNode& SceneGraph::room(int id) const {
  const auto it = rooms_.find(id);
  if (it == rooms_.end()) throw LookupError("unknown room id " + std::to_string(id));
  return it->second;
}

RoomNode& SceneGraph::room(int id) {
  const auto it = rooms_.find(id);
  if (it == rooms_.end()) throw LookupError("unknown room id " + std::to_string(id));
  return it->second;
}

const ObjectNode& SceneGraph::object(int id) const {
  const auto it = objects_.find(id);
  if (it == objects_.end()) {
    throw LookupError("unknown object id " + std::to_string(id));
  }
  return it->second;
}

ObjectNode& SceneGraph::object(int id) {
  const auto it = objects_.find(id);
  if (it == objects_.end()) {
    throw LookupError("unknown object id " + std::to_string(id));
  }
  return it->second;
}

const RoomEdge& SceneGraph::room_edge(int id) const {
  const auto it = room_edges_.find(id);
  if (it == room_edges_.end()) {
    throw LookupError("unknown room edge id " + std::to_string(id));
  }
  return it->second;
}

std::vector<int> SceneGraph::objects_of_room(int room_id) const {
  std::vector<int> out;
  for (const auto& [rid, oid] : object_edges_) {
    if (rid == room_id) out.push_back(oid);
  }
  return out;
}

std::set<int> SceneGraph::neighbors(int room_id) const {
  std::set<int> out;
  for (const auto& [eid, e] : room_edges_) {
    if (e.room_i == room_id) out.insert(e.room_j);
    if (e.room_j == room_id) out.insert(e.room_i);
  }
  return out;
}

std::vector<int> SceneGraph::edges_of_room(int room_id) const {
  std::vector<int> out;
  for (const auto& [eid, e] : room_edges_) {
    if (e.room_i == room_id || e.room_j == room_id) out.push_back(eid);
  }
  return out;
}

Sim3 SceneGraph::world_pose_of_object(int object_id) const {
  const ObjectNode& obj = object(object_id);
  return room(obj.parent_room).reference_pose * obj.pose_in_room;
}

void SceneGraph::remove_room(int room_id) {
  if (!rooms_.count(room_id)) {
    throw LookupError("remove_room: unknown room id " + std::to_string(room_id));
  }
  for (auto it = room_edges_.begin(); it != room_edges_.end();) {
    if (it->second.room_i == room_id || it->second.room_j == room_id) {
      it = room_edges_.erase(it);
    } else {
      ++it;
    }
  }
  for (auto it = object_edges_.begin(); it != object_edges_.end();) {
    if (it->first == room_id) {
      objects_.erase(it->second);
      it = object_edges_.erase(it);
    } else {
      ++it;
    }
  }
  rooms_.erase(room_id);
}

void SceneGraph::set_id_counters(int next_room, int next_object, int next_edge) {
  next_room_id_ = next_room;
  next_object_id_ = next_object;
  next_edge_id_ = next_edge;
}

RoomPoseGraphView::RoomPoseGraphView(SceneGraph& graph, bool factor_per_estimate)
    : graph_(&graph) {
  for (const auto& [id, node] : graph.rooms()) room_ids_.push_back(id);
  for (const auto& [eid, edge] : graph.room_edges()) {
    if (factor_per_estimate) {
      for (const auto& est : edge.estimates) {
        factors_.push_back(
            {edge.room_i, edge.room_j, est, edge.information, edge.kind, eid});
      }
    } else {
      factors_.push_back({edge.room_i, edge.room_j, edge.consensus,
                          edge.information, edge.kind, eid});
    }
  }
}

}  // namespace roomsg
