#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "roomsg/io.hpp"
#include "roomsg/kdtree.hpp"
#include "roomsg/metrics.hpp"
#include "roomsg/oracle.hpp"
#include "test_helpers.hpp"

using namespace roomsg;
using namespace roomsg::testing;

namespace {

struct Fixture {
  World world;
  SimulatedSequence seq;

  explicit Fixture(int rooms = 2, std::uint64_t seed = 9) {
    world = generate_world(fast_world_config(rooms), seed);
    SequenceSpec spec;
    for (int i = 0; i < rooms; ++i) spec.visit_order.push_back(i);
    spec.rng_seed = seed;
    seq = generate_sequence(world, spec);
  }

  std::vector<FrameRecord> batch(std::size_t begin, std::size_t count) const {
    return {seq.frames.begin() + begin, seq.frames.begin() + begin + count};
  }
};

}  // namespace

TEST_CASE("noiseless oracle reproduces anchored ground-truth poses") {
  const Fixture fix;
  OracleProvider oracle(fix.world, fix.seq.frames, zero_noise());
  const auto batch = fix.batch(0, 40);
  const RoomReconstruction recon = oracle.reconstruct_batch(batch);

  REQUIRE(recon.frame_poses.size() == batch.size());
  const Sim3 anchor_inv = batch.front().gt_pose->inverse();
  CHECK(sim3_log(recon.frame_poses.at(batch.front().id)).norm() < 1e-12);
  for (const auto& frame : batch) {
    const Sim3 expected = anchor_inv * *frame.gt_pose;
    CHECK(sim3_distance(recon.frame_poses.at(frame.id), expected) < 1e-12);
  }
  CHECK(!recon.points.empty());
}

TEST_CASE("scale-two gauge doubles translations and keeps rotations") {
  const Fixture fix;
  OracleNoiseModel noise = zero_noise();
  noise.batch_scale_range = {2.0, 2.0};
  OracleProvider oracle(fix.world, fix.seq.frames, noise);
  OracleProvider clean(fix.world, fix.seq.frames, zero_noise());

  const auto batch = fix.batch(0, 30);
  const auto scaled = oracle.reconstruct_batch(batch);
  const auto unscaled = clean.reconstruct_batch(batch);
  for (const auto& frame : batch) {
    const Sim3& a = scaled.frame_poses.at(frame.id);
    const Sim3& b = unscaled.frame_poses.at(frame.id);
    CHECK((a.translation() - 2.0 * b.translation()).norm() < 1e-12);
    CHECK(a.rotation().angularDistance(b.rotation()) < 1e-12);
    CHECK(a.scale() == doctest::Approx(1.0));
  }
  // Inter-frame relative translations double as well.
  const int f0 = batch[5].id, f1 = batch[20].id;
  const Sim3 rel_scaled =
      scaled.frame_poses.at(f0).inverse() * scaled.frame_poses.at(f1);
  const Sim3 rel_clean =
      unscaled.frame_poses.at(f0).inverse() * unscaled.frame_poses.at(f1);
  CHECK((rel_scaled.translation() - 2.0 * rel_clean.translation()).norm() < 1e-9);
  CHECK(rel_scaled.rotation().angularDistance(rel_clean.rotation()) < 1e-12);
}

TEST_CASE("single frame batches are rejected") {
  const Fixture fix;
  OracleProvider oracle(fix.world, fix.seq.frames, zero_noise());
  CHECK_THROWS_AS(oracle.reconstruct_batch(fix.batch(0, 1)), InvalidInputError);
}

TEST_CASE("scale honesty: descaled points match ground truth") {
  const Fixture fix;
  OracleNoiseModel noise = zero_noise();
  noise.batch_scale_range = {0.5, 2.5};
  noise.point_sigma = 0.01;
  OracleProvider oracle(fix.world, fix.seq.frames, noise);
  const auto batch = fix.batch(0, 40);
  const auto recon = oracle.reconstruct_batch(batch);
  const double s = oracle.batch_scales().back();

  const Sim3 anchor = *batch.front().gt_pose;
  PointCloud descaled;
  for (const auto& p : recon.points.points) descaled.add(anchor * (p / s));
  // Each descaled point should sit close to the world's surface samples.
  const PointCloud gt = fix.world.ground_truth_cloud();
  CHECK(chamfer_distance(descaled, gt, {1.0}) < 3.0 * noise.point_sigma +
                                                    0.2 /* density gap */);
}

TEST_CASE("pointmaps stay consistent with poses and the dense cloud") {
  const Fixture fix;
  OracleNoiseModel noise = zero_noise();
  noise.point_sigma = 0.02;
  noise.pose_rot_sigma = 0.01;
  noise.pose_trans_sigma = 0.02;
  noise.batch_scale_range = {0.8, 1.25};
  OracleProvider oracle(fix.world, fix.seq.frames, noise);
  const auto batch = fix.batch(0, 20);
  const auto recon = oracle.reconstruct_batch(batch);
  // Mapping a camera-frame point through the frame pose lands on a point of
  // the dense local cloud.
  const KdTree tree(recon.points.points);
  for (const auto& [fid, pm] : recon.per_frame_points) {
    const Sim3& pose = recon.frame_poses.at(fid);
    for (std::size_t i = 0; i < pm.cloud.size(); i += 17) {
      const Eigen::Vector3d local = pose * pm.cloud.points[i];
      CHECK(tree.nearest_distance(local) < 1e-9);
    }
  }
}

TEST_CASE("relative pose: identity, exactness, visibility, unknown frames") {
  const Fixture fix;
  OracleProvider oracle(fix.world, fix.seq.frames, zero_noise());

  const int f = fix.seq.frames[10].id;
  const auto self = oracle.relative_pose(f, f);
  CHECK(self.valid);
  CHECK(sim3_log(self.pose).norm() == 0.0);

  const auto rel = oracle.relative_pose(f, f + 1);
  REQUIRE(rel.valid);
  const Sim3 expected =
      fix.seq.frames[10].gt_pose->inverse() * *fix.seq.frames[11].gt_pose;
  CHECK(sim3_distance(rel.pose, expected) < 1e-12);

  CHECK_THROWS_AS(oracle.relative_pose(f, 999999), LookupError);
}

TEST_CASE("frames in mutually invisible rooms yield invalid estimates") {
  const Fixture fix;
  OracleProvider oracle(fix.world, fix.seq.frames, zero_noise());
  // Frame deep in room 0 and frame deep in room 1 (opposite corridor sides).
  int in_room0 = -1, in_room1 = -1;
  for (const auto& frame : fix.seq.frames) {
    if (!frame.gt_room) continue;
    const auto& room = fix.world.rooms[*frame.gt_room];
    const double wall_dist =
        std::abs(frame.gt_pose->translation().y() -
                 (room.side > 0 ? room.lo.y() : room.hi.y()));
    if (wall_dist < 1.0) continue;  // stay away from the doorway wall
    if (*frame.gt_room == 0 && in_room0 < 0) in_room0 = frame.id;
    if (*frame.gt_room == 1 && in_room1 < 0) in_room1 = frame.id;
  }
  REQUIRE(in_room0 >= 0);
  REQUIRE(in_room1 >= 0);
  CHECK(!oracle.relative_pose(in_room0, in_room1).valid);
}

TEST_CASE("oracle outputs are deterministic per seed and request sequence") {
  const Fixture fix;
  OracleNoiseModel noise;
  noise.rng_seed = 77;
  noise.batch_scale_range = {0.8, 1.25};
  OracleProvider a(fix.world, fix.seq.frames, noise);
  OracleProvider b(fix.world, fix.seq.frames, noise);
  const auto batch = fix.batch(0, 25);
  const auto ra = a.reconstruct_batch(batch);
  const auto rb = b.reconstruct_batch(batch);
  REQUIRE(ra.points.size() == rb.points.size());
  for (std::size_t i = 0; i < ra.points.size(); ++i) {
    CHECK((ra.points.points[i] - rb.points.points[i]).norm() == 0.0);
  }
  const auto pa = a.relative_pose(batch[0].id, batch[5].id);
  const auto pb = b.relative_pose(batch[0].id, batch[5].id);
  CHECK(sim3_distance(pa.pose, pb.pose) == 0.0);
}

TEST_CASE("injected failures and the retry path") {
  const Fixture fix;
  OracleProvider oracle(fix.world, fix.seq.frames, zero_noise());
  ProviderHooks hooks(oracle);
  hooks.fail_batch(0);
  const auto batch = fix.batch(0, 30);
  CHECK_THROWS_AS(hooks.reconstruct_batch(batch), ReconstructionFailedError);
  CHECK(hooks.reconstruct_batch(batch).frame_poses.size() == batch.size());

  hooks.fail_next_pairs(1);
  CHECK(!hooks.relative_pose(batch[0].id, batch[1].id).valid);
  CHECK(hooks.relative_pose(batch[0].id, batch[1].id).valid);
}

TEST_CASE("replay provider reads offline reconstructions") {
  const Fixture fix;
  OracleProvider oracle(fix.world, fix.seq.frames, zero_noise());
  const auto batch = fix.batch(0, 10);
  const auto recon = oracle.reconstruct_batch(batch);

  const auto dir = std::filesystem::temp_directory_path() / "roomsg_replay";
  std::filesystem::remove_all(dir);
  const auto batch_dir = dir / ("batch_" + std::to_string(batch.front().id));
  std::filesystem::create_directories(batch_dir);
  {
    Trajectory poses;
    for (const auto& [fid, pose] : recon.frame_poses) {
      poses.append(static_cast<double>(fid), pose);
    }
    write_tum_trajectory(batch_dir / "poses.tum", poses);
    write_ply(batch_dir / "points.ply", recon.points);
    std::ofstream pairs(dir / "pairs.txt");
    const Sim3 rel = oracle.relative_pose(batch[0].id, batch[1].id).pose;
    pairs << batch[0].id << " " << batch[1].id << " ";
    const auto& t = rel.translation();
    const auto& q = rel.rotation();
    pairs << t.x() << " " << t.y() << " " << t.z() << " " << q.x() << " " << q.y()
          << " " << q.z() << " " << q.w() << " " << rel.scale() << "\n";
  }

  ReplayProvider replay(dir);
  const auto replayed = replay.reconstruct_batch(batch);
  CHECK(replayed.frame_poses.size() == batch.size());
  CHECK(replayed.points.size() == recon.points.size());
  for (const auto& [fid, pose] : recon.frame_poses) {
    CHECK(sim3_distance(replayed.frame_poses.at(fid), pose) < 1e-9);
  }
  CHECK(replay.relative_pose(batch[0].id, batch[1].id).valid);
  // Reverse direction comes from inverting the stored pair.
  const auto reverse = replay.relative_pose(batch[1].id, batch[0].id);
  REQUIRE(reverse.valid);
  CHECK(sim3_distance(reverse.pose,
                      oracle.relative_pose(batch[1].id, batch[0].id).pose) < 1e-9);
  // Unknown batches fail like a provider failure.
  CHECK_THROWS_AS(replay.reconstruct_batch(fix.batch(40, 10)),
                  ReconstructionFailedError);
  std::filesystem::remove_all(dir);
}
