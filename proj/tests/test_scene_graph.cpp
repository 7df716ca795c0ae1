#include <doctest.h>

#include "roomsg/rng.hpp"
#include "roomsg/scene_graph.hpp"
#include "roomsg/scene_graph_io.hpp"

using namespace roomsg;

namespace {

RoomNode make_room(Rng& rng, int frames = 4) {
  RoomNode node;
  node.finalized = true;
  node.reference_pose = sim3_exp(make_tangent(
      rng.normal_vec3(1.0), rng.uniform(0.0, 1.0) * rng.unit_vec3(),
      rng.uniform(-0.3, 0.3)));
  static int next_frame = 0;
  for (int i = 0; i < frames; ++i) {
    const int fid = next_frame++;
    node.local_frame_poses[fid] = sim3_exp(make_tangent(
        rng.normal_vec3(0.5), rng.uniform(0.0, 0.5) * rng.unit_vec3(), 0.0));
    node.frame_timestamps[fid] = fid / 30.0;
  }
  node.point_cloud.add(rng.normal_vec3(1.0));
  node.point_cloud.add(rng.normal_vec3(1.0));
  node.frame_features.push_back(rng.unit_vec(8));
  return node;
}

ObjectNode make_object(Rng& rng) {
  ObjectNode node;
  node.pose_in_room = Sim3::from_translation(rng.normal_vec3(1.0));
  node.feature = rng.unit_vec(8);
  node.label = "chair";
  node.support_count = 3;
  node.point_cloud.add(rng.normal_vec3(0.2));
  return node;
}

RoomEdge make_edge(Rng& rng, int i, int j, int estimates = 2) {
  RoomEdge edge;
  edge.room_i = i;
  edge.room_j = j;
  for (int k = 0; k < estimates; ++k) {
    edge.estimates.push_back(sim3_exp(make_tangent(
        rng.normal_vec3(0.5), rng.uniform(0.0, 0.4) * rng.unit_vec3(),
        rng.uniform(-0.2, 0.2))));
  }
  edge.consensus = edge.estimates.front();
  return edge;
}

}  // namespace

TEST_CASE("graph construction and counting") {
  Rng rng(41);
  SceneGraph graph;
  const int r0 = graph.add_room(make_room(rng));
  CHECK(graph.rooms().size() == 1);
  CHECK(graph.room_edges().empty());

  CHECK_THROWS_AS(graph.add_object(99, make_object(rng)), StructuralError);

  const int r1 = graph.add_room(make_room(rng));
  const int r2 = graph.add_room(make_room(rng));
  graph.add_room_edge(make_edge(rng, r0, r1));
  graph.add_room_edge(make_edge(rng, r1, r2));
  auto view = room_pose_graph_view(graph, /*factor_per_estimate=*/false);
  CHECK(view.room_ids().size() == 3);
  CHECK(view.factors().size() == 2);
}

TEST_CASE("duplicate ids and dangling edges are rejected") {
  Rng rng(42);
  SceneGraph graph;
  RoomNode a = make_room(rng);
  a.id = 5;
  graph.add_room(a);
  RoomNode b = make_room(rng);
  b.id = 5;
  CHECK_THROWS_AS(graph.add_room(b), StructuralError);
  CHECK_THROWS_AS(graph.add_room_edge(make_edge(rng, 5, 17)), StructuralError);
  RoomEdge self = make_edge(rng, 5, 5);
  CHECK_THROWS_AS(graph.add_room_edge(self), StructuralError);
}

TEST_CASE("view excludes objects and exposes parallel edges separately") {
  Rng rng(43);
  SceneGraph graph;
  const int r0 = graph.add_room(make_room(rng));
  const int r1 = graph.add_room(make_room(rng));
  graph.add_object(r0, make_object(rng));

  auto edge_a = make_edge(rng, r0, r1, 1);
  auto edge_b = make_edge(rng, r0, r1, 1);
  edge_b.kind = RoomEdgeKind::kLoopClosure;
  graph.add_room_edge(edge_a);
  graph.add_room_edge(edge_b);

  auto view = room_pose_graph_view(graph);
  CHECK(view.room_ids().size() == 2);
  CHECK(view.factors().size() == 2);  // transition + loop factor, distinct

  SceneGraph empty;
  auto empty_view = room_pose_graph_view(empty);
  CHECK(empty_view.room_ids().empty());
  CHECK(empty_view.factors().empty());
}

TEST_CASE("world pose of an object follows its room") {
  Rng rng(44);
  SceneGraph graph;
  RoomNode room = make_room(rng);
  room.reference_pose = Sim3::identity();
  const int r = graph.add_room(room);
  ObjectNode obj = make_object(rng);
  const Sim3 obj_pose = obj.pose_in_room;
  const int o = graph.add_object(r, obj);

  CHECK(sim3_distance(graph.world_pose_of_object(o), obj_pose) < 1e-12);

  graph.room(r).reference_pose = Sim3::from_translation({1, 0, 0});
  const Sim3 world = graph.world_pose_of_object(o);
  CHECK(sim3_distance(world, Sim3::from_translation({1, 0, 0}) * obj_pose) < 1e-12);

  // Overwriting the room pose moves the object by exactly that left factor.
  const Sim3 update = sim3_exp(make_tangent({0.2, -0.1, 0.4}, {0.1, 0.2, 0.0}, 0.1));
  const Sim3 before = graph.world_pose_of_object(o);
  graph.room(r).reference_pose = update * graph.room(r).reference_pose;
  CHECK(sim3_distance(graph.world_pose_of_object(o), update * before) < 1e-10);

  CHECK_THROWS_AS(graph.world_pose_of_object(12345), LookupError);
}

TEST_CASE("containment edges stay consistent through room removal") {
  Rng rng(45);
  SceneGraph graph;
  const int r0 = graph.add_room(make_room(rng));
  const int r1 = graph.add_room(make_room(rng));
  graph.add_room_edge(make_edge(rng, r0, r1));
  const int o0 = graph.add_object(r0, make_object(rng));
  graph.add_object(r1, make_object(rng));

  graph.remove_room(r0);
  CHECK(!graph.has_room(r0));
  CHECK(!graph.has_object(o0));
  CHECK(graph.room_edges().empty());
  CHECK(graph.objects().size() == 1);
  for (const auto& [rid, oid] : graph.object_edges()) CHECK(rid == r1);
}

TEST_CASE("serialization roundtrips randomized graphs") {
  Rng rng(46);
  for (int seed = 0; seed < 20; ++seed) {
    Rng local = rng.fork(seed);
    SceneGraph graph;
    std::vector<int> rooms;
    const int n_rooms = 2 + int(local.uniform_index(4));
    for (int i = 0; i < n_rooms; ++i) rooms.push_back(graph.add_room(make_room(local)));
    for (int i = 0; i + 1 < n_rooms; ++i) {
      graph.add_room_edge(make_edge(local, rooms[i], rooms[i + 1],
                                    1 + int(local.uniform_index(3))));
    }
    const int n_objects = int(local.uniform_index(5));
    for (int i = 0; i < n_objects; ++i) {
      graph.add_object(rooms[local.uniform_index(rooms.size())], make_object(local));
    }

    const std::string text = serialize_scene_graph(graph);
    const SceneGraph back = deserialize_scene_graph(text);

    REQUIRE(back.rooms().size() == graph.rooms().size());
    REQUIRE(back.objects().size() == graph.objects().size());
    REQUIRE(back.room_edges().size() == graph.room_edges().size());
    for (const auto& [id, room] : graph.rooms()) {
      const RoomNode& other = back.room(id);
      CHECK(sim3_distance(other.reference_pose, room.reference_pose) < 1e-9);
      REQUIRE(other.local_frame_poses.size() == room.local_frame_poses.size());
      for (const auto& [fid, pose] : room.local_frame_poses) {
        CHECK(sim3_distance(other.local_frame_poses.at(fid), pose) < 1e-9);
      }
    }
    for (const auto& [id, obj] : graph.objects()) {
      CHECK(back.object(id).parent_room == obj.parent_room);
      CHECK((back.object(id).feature - obj.feature).norm() < 1e-9);
    }
    // Serialization is deterministic.
    CHECK(serialize_scene_graph(back) == text);
  }
}

TEST_CASE("empty graph roundtrip") {
  SceneGraph graph;
  const SceneGraph back = deserialize_scene_graph(serialize_scene_graph(graph));
  CHECK(back.rooms().empty());
  CHECK(back.objects().empty());
}

TEST_CASE("truncated or malformed documents fail cleanly") {
  Rng rng(47);
  SceneGraph graph;
  graph.add_room(make_room(rng));
  const std::string text = serialize_scene_graph(graph);
  CHECK_THROWS_AS(deserialize_scene_graph(text.substr(0, text.size() / 2)), ParseError);
  CHECK_THROWS_AS(deserialize_scene_graph("{}"), ParseError);
  CHECK_THROWS_AS(deserialize_scene_graph("not json"), ParseError);

  // The error names the offending path.
  try {
    deserialize_scene_graph(R"({"version":1,"rooms":[{"id":0}],"objects":[],)"
                            R"("room_edges":[],"object_edges":[]})");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("rooms[0]") != std::string::npos);
  }
}

TEST_CASE("save/load directory layout including clouds") {
  Rng rng(48);
  SceneGraph graph;
  const int r = graph.add_room(make_room(rng));
  graph.add_object(r, make_object(rng));
  const auto dir = std::filesystem::temp_directory_path() / "roomsg_graph_io";
  std::filesystem::remove_all(dir);
  save_scene_graph(graph, dir);
  const SceneGraph back = load_scene_graph(dir);
  CHECK(back.room(r).point_cloud.size() == graph.room(r).point_cloud.size());
  CHECK(back.objects().size() == 1);
  std::filesystem::remove_all(dir);
}
