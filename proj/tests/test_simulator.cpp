#include <doctest.h>

#include <filesystem>
#include <queue>

#include "roomsg/simulator.hpp"

using namespace roomsg;

namespace {

WorldConfig small_world_config(int rooms = 3) {
  WorldConfig config;
  config.n_rooms = rooms;
  config.wall_density = 60.0;  // keep unit tests fast
  config.points_per_object = 80;
  return config;
}

}  // namespace

TEST_CASE("two rooms and one connector") {
  const World world = generate_world(small_world_config(2), 7);
  CHECK(world.rooms.size() == 2);
  CHECK(world.connectors.size() == 1);
  CHECK(world.room_embeddings.size() == 2);
  CHECK(!world.surface_points.empty());
}

TEST_CASE("world generation is deterministic under the seed") {
  const World a = generate_world(small_world_config(4), 99);
  const World b = generate_world(small_world_config(4), 99);
  REQUIRE(a.surface_points.size() == b.surface_points.size());
  for (std::size_t i = 0; i < a.surface_points.size(); ++i) {
    CHECK((a.surface_points.points[i] - b.surface_points.points[i]).norm() == 0.0);
    CHECK(a.surface_points.labels[i] == b.surface_points.labels[i]);
  }
  REQUIRE(a.objects.size() == b.objects.size());
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    CHECK((a.objects[i].center - b.objects[i].center).norm() == 0.0);
  }

  const World c = generate_world(small_world_config(4), 100);
  CHECK((a.rooms[0].hi - c.rooms[0].hi).norm() != 0.0);
}

TEST_CASE("all rooms reachable through the connector graph") {
  const World world = generate_world(small_world_config(6), 3);
  std::vector<char> reached(world.rooms.size(), 0);
  std::queue<int> frontier;
  frontier.push(0);
  reached[0] = 1;
  while (!frontier.empty()) {
    const int cur = frontier.front();
    frontier.pop();
    for (const auto& conn : world.connectors) {
      const int other = conn.room_a == cur   ? conn.room_b
                        : conn.room_b == cur ? conn.room_a
                                             : -1;
      if (other >= 0 && !reached[other]) {
        reached[other] = 1;
        frontier.push(other);
      }
    }
  }
  for (const char r : reached) CHECK(r == 1);
}

TEST_CASE("degenerate world requests are config errors") {
  CHECK_THROWS_AS(generate_world(small_world_config(1), 1), ConfigError);
  WorldConfig too_long = small_world_config(6);
  too_long.max_spine_length = 10.0;
  CHECK_THROWS_AS(generate_world(too_long, 1), ConfigError);
}

TEST_CASE("rooms do not overlap each other or the corridor") {
  const World world = generate_world(small_world_config(6), 17);
  for (std::size_t i = 0; i < world.rooms.size(); ++i) {
    for (std::size_t j = i + 1; j < world.rooms.size(); ++j) {
      const auto& a = world.rooms[i];
      const auto& b = world.rooms[j];
      const bool overlap_x = a.lo.x() < b.hi.x() && b.lo.x() < a.hi.x();
      const bool overlap_y = a.lo.y() < b.hi.y() && b.lo.y() < a.hi.y();
      CHECK(!(overlap_x && overlap_y));
    }
    CHECK(std::abs(world.rooms[i].lo.y()) >= world.config.corridor_width / 2 - 1e-9);
  }
}

TEST_CASE("world json roundtrip rebuilds identical geometry") {
  const World world = generate_world(small_world_config(3), 23);
  const auto path = std::filesystem::temp_directory_path() / "roomsg_world.json";
  write_world(path, world);
  const World back = read_world(path);
  REQUIRE(back.surface_points.size() == world.surface_points.size());
  for (std::size_t i = 0; i < world.surface_points.size(); ++i) {
    CHECK((back.surface_points.points[i] - world.surface_points.points[i]).norm() ==
          0.0);
  }
  CHECK(back.rooms.size() == world.rooms.size());
  CHECK((back.doorway_cue - world.doorway_cue).norm() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("sequence counts frames per leg and labels ground truth") {
  const World world = generate_world(small_world_config(3), 5);
  SequenceSpec spec;
  spec.visit_order = {0, 1, 2};
  spec.frames_per_room = 80;
  spec.frames_per_connector = 8;
  const SimulatedSequence seq = generate_sequence(world, spec);
  CHECK(seq.frames.size() == 3 * 80 + 2 * 8);
  CHECK(seq.connector_traversals == 2);
  CHECK(seq.gt_trajectory.size() == seq.frames.size());

  // Zero noise: the frame label always matches the containing region.
  const CueSet cues = world.cue_set();
  for (const auto& frame : seq.frames) {
    const auto score = score_frame(frame, cues);
    const Eigen::Vector3d pos = frame.gt_pose->translation();
    const int region = world.feature_region(pos);
    if (region >= 0) {
      CHECK(score.label == "room_" + std::to_string(region));
      CHECK(score.margin < 0);
    } else {
      CHECK(score.margin > 0);
    }
    // gt_room matches geometric containment.
    const auto room = world.room_containing(pos);
    CHECK(frame.gt_room == room);
  }
}

TEST_CASE("revisit orders produce revisits and stay deterministic") {
  const World world = generate_world(small_world_config(3), 5);
  SequenceSpec spec;
  spec.visit_order = {0, 1, 0};
  const SimulatedSequence seq = generate_sequence(world, spec);
  int room0_frames = 0;
  for (const auto& f : seq.frames) {
    if (f.gt_room && *f.gt_room == 0) ++room0_frames;
  }
  CHECK(room0_frames >= 2 * spec.frames_per_room - 10);

  const SimulatedSequence again = generate_sequence(world, spec);
  REQUIRE(again.frames.size() == seq.frames.size());
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    CHECK((again.frames[i].feature - seq.frames[i].feature).norm() == 0.0);
  }

  SequenceSpec bad;
  bad.visit_order = {0, 0};
  CHECK_THROWS_AS(generate_sequence(world, bad), ConfigError);
  SequenceSpec unknown;
  unknown.visit_order = {0, 9};
  CHECK_THROWS_AS(generate_sequence(world, unknown), ConfigError);
}

TEST_CASE("tracklet masks select exactly the object's pixels") {
  const World world = generate_world(small_world_config(2), 31);
  SequenceSpec spec;
  spec.visit_order = {0, 1};
  const SimulatedSequence seq = generate_sequence(world, spec);
  REQUIRE(!seq.tracklets.tracklets.empty());
  for (const auto& tracklet : seq.tracklets.tracklets) {
    REQUIRE(!tracklet.observations.empty());
    const auto& obs = tracklet.observations.front();
    const auto& frame = seq.frames[obs.frame_id];
    const auto visible = world.visible_points(frame.gt_pose->translation());
    // Every masked pixel belongs to one object, and the mask is complete.
    int expected_object = visible[obs.mask.front()].object_id;
    REQUIRE(expected_object >= 0);
    int count = 0;
    for (const auto& vp : visible) {
      if (vp.object_id == expected_object) ++count;
    }
    CHECK(int(obs.mask.size()) == count);
    for (const int px : obs.mask) {
      CHECK(visible[px].object_id == expected_object);
    }
  }
}

TEST_CASE("line of sight is blocked by walls and open through doorways") {
  const World world = generate_world(small_world_config(2), 41);
  const RoomBox& r0 = world.rooms[0];
  const RoomBox& r1 = world.rooms[1];
  const Eigen::Vector3d c0 = r0.center();
  const Eigen::Vector3d c1 = r1.center();
  // Centers of different rooms on opposite corridor sides: blocked.
  CHECK(!world.line_of_sight(c0, c1));
  // Straight through the room's own doorway: open.
  const Eigen::Vector3d inside(r0.door_x, c0.y(), 1.5);
  const Eigen::Vector3d corridor(r0.door_x, 0.0, 1.5);
  CHECK(world.line_of_sight(inside, corridor));
  CHECK(world.co_visible(inside, corridor));
  // Too far apart is not co-visible even if unobstructed.
  const Eigen::Vector3d far_corridor(world.spine_x1 - 0.5, 0.0, 1.5);
  if ((corridor - far_corridor).norm() > world.config.visibility_radius) {
    CHECK(!world.co_visible(corridor, far_corridor));
  }
}

TEST_CASE("visible points stay within the camera's region") {
  const World world = generate_world(small_world_config(3), 51);
  const Eigen::Vector3d in_room = world.rooms[1].center();
  for (const auto& vp : world.visible_points(in_room)) {
    CHECK(vp.label == 1);
    CHECK((vp.position - in_room).head<2>().norm() <=
          world.config.visibility_radius + 1e-9);
  }
  const Eigen::Vector3d in_corridor(world.rooms[0].door_x + 1.0, 0.0, 1.5);
  for (const auto& vp : world.visible_points(in_corridor)) {
    CHECK(vp.label == World::kCorridorRegion);
  }
}
