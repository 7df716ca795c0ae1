#include "roomsg/oracle.hpp"

#include <set>

namespace roomsg {

namespace {

Sim3 pose_noise(Rng& rng, double rot_sigma, double trans_sigma) {
  const Eigen::Vector3d axis = rng.unit_vec3();
  const double angle = rng.normal(0.0, rot_sigma);
  return Sim3(so3_exp(angle * axis), rng.normal_vec3(trans_sigma), 1.0);
}

// Pure-scale conjugation of an SE(3)-like pose: rotation kept, translation
// scaled. Exactly what the pose looks like in a world s times larger.
Sim3 scale_conjugate(const Sim3& pose, double s) {
  return Sim3(pose.rotation(), s * pose.translation(), pose.scale());
}

}  // namespace

OracleProvider::OracleProvider(const World& world,
                               const std::vector<FrameRecord>& frames,
                               const OracleNoiseModel& noise)
    : world_(&world), noise_(noise), rng_(noise.rng_seed ^ 0x6f7261636cULL) {
  noise_.validate();
  for (const auto& frame : frames) {
    if (!frame.gt_pose) {
      throw InvalidInputError("OracleProvider: frame " + std::to_string(frame.id) +
                              " has no ground-truth pose");
    }
    gt_poses_.emplace(frame.id, *frame.gt_pose);
  }
}

const Sim3& OracleProvider::gt_pose(int frame_id) const {
  const auto it = gt_poses_.find(frame_id);
  if (it == gt_poses_.end()) {
    throw LookupError("OracleProvider: unknown frame " + std::to_string(frame_id));
  }
  return it->second;
}

RoomReconstruction OracleProvider::reconstruct_batch(
    const std::vector<FrameRecord>& frames) {
  if (frames.size() < 2) {
    throw InvalidInputError("reconstruct_batch: need at least 2 frames");
  }
  if (noise_.batch_failure_rate > 0 && rng_.uniform() < noise_.batch_failure_rate) {
    throw ReconstructionFailedError("simulated reconstruction failure");
  }
  const Sim3& anchor = gt_pose(frames.front().id);
  const Sim3 world_from_anchor_inv = anchor.inverse();
  const double scale =
      rng_.uniform(noise_.batch_scale_range[0], noise_.batch_scale_range[1]);
  batch_scales_.push_back(scale);

  RoomReconstruction recon;
  for (const auto& frame : frames) {
    Sim3 local = scale_conjugate(world_from_anchor_inv * gt_pose(frame.id), scale);
    if (frame.id != frames.front().id &&
        (noise_.pose_rot_sigma > 0 || noise_.pose_trans_sigma > 0)) {
      local = local * pose_noise(rng_, noise_.pose_rot_sigma, noise_.pose_trans_sigma);
    }
    recon.frame_poses.emplace(frame.id, local);
  }

  // Union of the points visible from any frame, noised once per point so the
  // dense cloud and the per-frame pointmaps stay consistent.
  std::map<int, Eigen::Vector3d> local_points;  // global id -> noised local point
  std::map<int, int> point_labels;
  std::map<int, std::vector<VisiblePoint>> per_frame_visible;
  for (const auto& frame : frames) {
    per_frame_visible.emplace(frame.id,
                              world_->visible_points(gt_pose(frame.id).translation()));
  }
  for (const auto& frame : frames) {
    for (const auto& vp : per_frame_visible.at(frame.id)) {
      if (local_points.count(vp.global_id)) continue;
      Eigen::Vector3d local = scale * (world_from_anchor_inv * vp.position);
      if (noise_.point_sigma > 0) local += rng_.normal_vec3(noise_.point_sigma);
      local_points.emplace(vp.global_id, local);
      point_labels.emplace(vp.global_id, vp.label);
    }
  }
  for (const auto& [gid, p] : local_points) {
    recon.points.add(p, point_labels.at(gid));
  }

  // Camera-frame pointmaps, derived from the same noised local points via
  // the same noised local poses.
  for (const auto& frame : frames) {
    FramePointmap pm;
    const Sim3 camera_from_local = recon.frame_poses.at(frame.id).inverse();
    const auto& visible = per_frame_visible.at(frame.id);
    for (std::size_t px = 0; px < visible.size(); ++px) {
      pm.pixels.push_back(static_cast<int>(px));
      pm.cloud.add(camera_from_local * local_points.at(visible[px].global_id),
                   visible[px].label);
    }
    recon.per_frame_points.emplace(frame.id, std::move(pm));
  }
  return recon;
}

RelativePoseEstimate OracleProvider::relative_pose(int frame_p, int frame_q) {
  const Sim3& gp = gt_pose(frame_p);
  const Sim3& gq = gt_pose(frame_q);
  RelativePoseEstimate est;
  if (frame_p == frame_q) {
    est.pose = Sim3::identity();
    est.valid = true;
    est.confidence = 1.0;
    return est;
  }
  // Random failures and co-visibility both consume one uniform draw so the
  // stream stays aligned across configurations.
  const double failure_draw = rng_.uniform();
  if (!world_->co_visible(gp.translation(), gq.translation())) {
    return est;
  }
  if (noise_.pair_failure_rate > 0 && failure_draw < noise_.pair_failure_rate) {
    return est;
  }
  Sim3 rel = gp.inverse() * gq;
  if (noise_.pose_rot_sigma > 0 || noise_.pose_trans_sigma > 0) {
    rel = rel * pose_noise(rng_, noise_.pose_rot_sigma, noise_.pose_trans_sigma);
  }
  est.pose = rel;
  est.valid = true;
  est.confidence = 1.0;
  return est;
}

}  // namespace roomsg
