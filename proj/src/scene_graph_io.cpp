#include "roomsg/scene_graph_io.hpp"

#include <fstream>

#include <json.hpp>

#include "roomsg/io.hpp"

namespace roomsg {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

json pose_to_json(const Sim3& T) {
  const auto& q = T.rotation();
  const auto& t = T.translation();
  return json{{"q", {q.w(), q.x(), q.y(), q.z()}},
              {"t", {t.x(), t.y(), t.z()}},
              {"s", T.scale()}};
}

// --- checked accessors; every failure names the JSON path ------------------

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected object");
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(path + "." + key + ": missing");
  return *it;
}

double require_number(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) throw ParseError(path + "." + key + ": expected number");
  return v.get<double>();
}

int require_int(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number_integer()) throw ParseError(path + "." + key + ": expected integer");
  return v.get<int>();
}

bool require_bool(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_boolean()) throw ParseError(path + "." + key + ": expected bool");
  return v.get<bool>();
}

std::string require_string(const json& j, const std::string& key,
                           const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_string()) throw ParseError(path + "." + key + ": expected string");
  return v.get<std::string>();
}

const json& require_array(const json& j, const std::string& key,
                          const std::string& path, int size = -1) {
  const json& v = require(j, key, path);
  if (!v.is_array()) throw ParseError(path + "." + key + ": expected array");
  if (size >= 0 && static_cast<int>(v.size()) != size) {
    throw ParseError(path + "." + key + ": expected " + std::to_string(size) +
                     " entries, got " + std::to_string(v.size()));
  }
  return v;
}

Sim3 pose_from_json(const json& j, const std::string& path) {
  const json& q = require_array(j, "q", path, 4);
  const json& t = require_array(j, "t", path, 3);
  const double s = require_number(j, "s", path);
  try {
    return Sim3(Eigen::Quaterniond(q[0].get<double>(), q[1].get<double>(),
                                   q[2].get<double>(), q[3].get<double>()),
                Eigen::Vector3d(t[0].get<double>(), t[1].get<double>(),
                                t[2].get<double>()),
                s);
  } catch (const InvalidInputError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

FeatureVector feature_from_json(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw ParseError(path + ": expected array");
  FeatureVector f(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      throw ParseError(path + "[" + std::to_string(i) + "]: expected number");
    }
    f[static_cast<int>(i)] = arr[i].get<double>();
  }
  return f;
}

json feature_to_json(const FeatureVector& f) {
  json arr = json::array();
  for (int i = 0; i < f.size(); ++i) arr.push_back(f[i]);
  return arr;
}

json information_to_json(const Matrix7d& info) {
  json arr = json::array();
  for (int r = 0; r < 7; ++r) {
    for (int c = r; c < 7; ++c) arr.push_back(info(r, c));
  }
  return arr;
}

Matrix7d information_from_json(const json& arr, const std::string& path) {
  if (!arr.is_array() || arr.size() != 28) {
    throw ParseError(path + ": expected 28 upper-triangular entries");
  }
  Matrix7d info;
  int k = 0;
  for (int r = 0; r < 7; ++r) {
    for (int c = r; c < 7; ++c, ++k) {
      const double v = arr[k].get<double>();
      info(r, c) = v;
      info(c, r) = v;
    }
  }
  return info;
}

std::string room_cloud_ref(int id) {
  return "rooms/room_" + std::to_string(id) + ".ply";
}
std::string object_cloud_ref(int id) {
  return "objects/object_" + std::to_string(id) + ".ply";
}

json graph_to_json(const SceneGraph& graph) {
  json doc;
  doc["version"] = kSchemaVersion;

  json rooms = json::array();
  for (const auto& [id, node] : graph.rooms()) {
    json r;
    r["id"] = id;
    r["pose"] = pose_to_json(node.reference_pose);
    json poses = json::object();
    for (const auto& [fid, pose] : node.local_frame_poses) {
      poses[std::to_string(fid)] = pose_to_json(pose);
    }
    r["local_frame_poses"] = std::move(poses);
    json stamps = json::object();
    for (const auto& [fid, ts] : node.frame_timestamps) {
      stamps[std::to_string(fid)] = ts;
    }
    r["frame_timestamps"] = std::move(stamps);
    json feats = json::array();
    for (const auto& f : node.frame_features) feats.push_back(feature_to_json(f));
    r["frame_features"] = std::move(feats);
    r["finalized"] = node.finalized;
    r["valid"] = node.valid;
    r["point_cloud_file"] = room_cloud_ref(id);
    rooms.push_back(std::move(r));
  }
  doc["rooms"] = std::move(rooms);

  json objects = json::array();
  for (const auto& [id, node] : graph.objects()) {
    json o;
    o["id"] = id;
    o["parent_room"] = node.parent_room;
    o["pose"] = pose_to_json(node.pose_in_room);
    o["feature"] = feature_to_json(node.feature);
    o["label"] = node.label;
    o["support_count"] = node.support_count;
    o["point_cloud_file"] = object_cloud_ref(id);
    objects.push_back(std::move(o));
  }
  doc["objects"] = std::move(objects);

  json edges = json::array();
  for (const auto& [id, edge] : graph.room_edges()) {
    json e;
    e["id"] = id;
    e["rooms"] = {edge.room_i, edge.room_j};
    e["kind"] = edge.kind == RoomEdgeKind::kTransition ? "transition" : "loop_closure";
    json ests = json::array();
    for (const auto& est : edge.estimates) ests.push_back(pose_to_json(est));
    e["estimates"] = std::move(ests);
    e["consensus"] = pose_to_json(edge.consensus);
    e["information_upper"] = information_to_json(edge.information);
    edges.push_back(std::move(e));
  }
  doc["room_edges"] = std::move(edges);

  json oe = json::array();
  for (const auto& [rid, oid] : graph.object_edges()) {
    oe.push_back(json::array({rid, oid}));
  }
  doc["object_edges"] = std::move(oe);
  return doc;
}

SceneGraph graph_from_json(const json& doc) {
  const int version = require_int(doc, "version", "$");
  if (version != kSchemaVersion) {
    throw ParseError("$.version: unsupported schema version " +
                     std::to_string(version));
  }
  SceneGraph graph;
  int max_room = -1, max_object = -1, max_edge = -1;

  const json& rooms = require_array(doc, "rooms", "$");
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const std::string path = "$.rooms[" + std::to_string(i) + "]";
    const json& r = rooms[i];
    RoomNode node;
    node.id = require_int(r, "id", path);
    node.reference_pose = pose_from_json(require(r, "pose", path), path + ".pose");
    const json& poses = require(r, "local_frame_poses", path);
    if (!poses.is_object()) throw ParseError(path + ".local_frame_poses: expected object");
    for (const auto& [key, val] : poses.items()) {
      node.local_frame_poses[std::stoi(key)] =
          pose_from_json(val, path + ".local_frame_poses." + key);
    }
    const json& stamps = require(r, "frame_timestamps", path);
    for (const auto& [key, val] : stamps.items()) {
      node.frame_timestamps[std::stoi(key)] = val.get<double>();
    }
    const json& feats = require_array(r, "frame_features", path);
    for (std::size_t k = 0; k < feats.size(); ++k) {
      node.frame_features.push_back(feature_from_json(
          feats[k], path + ".frame_features[" + std::to_string(k) + "]"));
    }
    node.finalized = require_bool(r, "finalized", path);
    node.valid = require_bool(r, "valid", path);
    max_room = std::max(max_room, node.id);
    graph.add_room(std::move(node));
  }

  const json& objects = require_array(doc, "objects", "$");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string path = "$.objects[" + std::to_string(i) + "]";
    const json& o = objects[i];
    ObjectNode node;
    node.id = require_int(o, "id", path);
    const int parent = require_int(o, "parent_room", path);
    node.pose_in_room = pose_from_json(require(o, "pose", path), path + ".pose");
    node.feature = feature_from_json(require(o, "feature", path), path + ".feature");
    node.label = require_string(o, "label", path);
    node.support_count = require_int(o, "support_count", path);
    max_object = std::max(max_object, node.id);
    try {
      graph.add_object(parent, std::move(node));
    } catch (const StructuralError& e) {
      throw ParseError(path + ": " + e.what());
    }
  }

  const json& edges = require_array(doc, "room_edges", "$");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string path = "$.room_edges[" + std::to_string(i) + "]";
    const json& e = edges[i];
    RoomEdge edge;
    edge.id = require_int(e, "id", path);
    const json& pair = require_array(e, "rooms", path, 2);
    edge.room_i = pair[0].get<int>();
    edge.room_j = pair[1].get<int>();
    const std::string kind = require_string(e, "kind", path);
    if (kind == "transition") {
      edge.kind = RoomEdgeKind::kTransition;
    } else if (kind == "loop_closure") {
      edge.kind = RoomEdgeKind::kLoopClosure;
    } else {
      throw ParseError(path + ".kind: unknown value `" + kind + "`");
    }
    const json& ests = require_array(e, "estimates", path);
    for (std::size_t k = 0; k < ests.size(); ++k) {
      edge.estimates.push_back(
          pose_from_json(ests[k], path + ".estimates[" + std::to_string(k) + "]"));
    }
    edge.consensus =
        pose_from_json(require(e, "consensus", path), path + ".consensus");
    edge.information = information_from_json(require(e, "information_upper", path),
                                             path + ".information_upper");
    max_edge = std::max(max_edge, edge.id);
    try {
      graph.add_room_edge(std::move(edge));
    } catch (const StructuralError& err) {
      throw ParseError(path + ": " + err.what());
    }
  }

  // Containment edges are implied by object parent_room fields; the explicit
  // list is validated for consistency.
  const json& oe = require_array(doc, "object_edges", "$");
  if (oe.size() != graph.object_edges().size()) {
    throw ParseError("$.object_edges: count mismatch with objects");
  }
  for (std::size_t i = 0; i < oe.size(); ++i) {
    const std::string path = "$.object_edges[" + std::to_string(i) + "]";
    if (!oe[i].is_array() || oe[i].size() != 2) {
      throw ParseError(path + ": expected [room, object] pair");
    }
    const std::pair<int, int> edge{oe[i][0].get<int>(), oe[i][1].get<int>()};
    if (!graph.object_edges().count(edge)) {
      throw ParseError(path + ": pair does not match any object parent");
    }
  }

  graph.set_id_counters(max_room + 1, max_object + 1, max_edge + 1);
  return graph;
}

}  // namespace

std::string serialize_scene_graph(const SceneGraph& graph) {
  return graph_to_json(graph).dump(2) + "\n";
}

SceneGraph deserialize_scene_graph(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scene graph document: ") + e.what());
  }
  return graph_from_json(doc);
}

void save_scene_graph(const SceneGraph& graph, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "rooms");
  std::filesystem::create_directories(dir / "objects");
  std::ofstream out(dir / "scene_graph.json");
  if (!out) throw Error("cannot write " + (dir / "scene_graph.json").string());
  out << serialize_scene_graph(graph);
  for (const auto& [id, node] : graph.rooms()) {
    write_ply(dir / room_cloud_ref(id), node.point_cloud);
  }
  for (const auto& [id, node] : graph.objects()) {
    write_ply(dir / object_cloud_ref(id), node.point_cloud);
  }
}

SceneGraph load_scene_graph(const std::filesystem::path& dir) {
  std::ifstream in(dir / "scene_graph.json");
  if (!in) throw ParseError("cannot open " + (dir / "scene_graph.json").string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  SceneGraph graph = deserialize_scene_graph(text);
  for (const auto& [id, node] : graph.rooms()) {
    const auto file = dir / room_cloud_ref(id);
    if (std::filesystem::exists(file)) graph.room(id).point_cloud = read_ply(file);
  }
  for (const auto& [id, node] : graph.objects()) {
    const auto file = dir / object_cloud_ref(id);
    if (std::filesystem::exists(file)) graph.object(id).point_cloud = read_ply(file);
  }
  return graph;
}

}  // namespace roomsg
