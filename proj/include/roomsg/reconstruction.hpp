#pragma once

#include <array>
#include <map>
#include <memory>
#include <vector>

#include "roomsg/point_cloud.hpp"
#include "roomsg/segmenter.hpp"
#include "roomsg/sim3.hpp"

namespace roomsg {

// Sparse per-frame pointmap: camera-frame points keyed by pixel index on the
// tracklet mask grid.
struct FramePointmap {
  std::vector<int> pixels;  // parallel to cloud.points
  PointCloud cloud;         // camera frame
};

// Output of one batch reconstruction, everything expressed in the batch's
// local frame anchored at its first frame (anchor pose = identity).
struct RoomReconstruction {
  std::map<int, Sim3> frame_poses;          // frame id -> local frame <- camera
  PointCloud points;                        // dense cloud, local frame
  std::map<int, FramePointmap> per_frame_points;  // depth-derived, camera frame
};

struct RelativePoseEstimate {
  Sim3 pose;  // frame q expressed in frame p
  bool valid = false;
  double confidence = 0.0;  // in [0, 1]; > 0 when valid
};

// Noise applied by the synthetic oracle to mimic a feed-forward monocular
// model: per-frame pose jitter, per-point jitter, an unknown per-batch scale
// (the monocular scale ambiguity), and random query failures.
struct OracleNoiseModel {
  double pose_rot_sigma = 0.005;   // radians
  double pose_trans_sigma = 0.02;  // meters
  double point_sigma = 0.01;       // meters
  std::array<double, 2> batch_scale_range = {1.0, 1.0};
  double pair_failure_rate = 0.0;   // two-view query failure probability
  double batch_failure_rate = 0.0;  // batch reconstruction failure probability
  std::uint64_t rng_seed = 1;

  void validate() const {
    if (batch_scale_range[0] <= 0 || batch_scale_range[1] < batch_scale_range[0]) {
      throw ConfigError("OracleNoiseModel: invalid batch_scale_range");
    }
    if (pose_rot_sigma < 0 || pose_trans_sigma < 0 || point_sigma < 0 ||
        pair_failure_rate < 0 || pair_failure_rate > 1 ||
        batch_failure_rate < 0 || batch_failure_rate > 1) {
      throw ConfigError("OracleNoiseModel: negative sigma or bad rate");
    }
  }
};

// Capability interface standing in for the feed-forward reconstruction
// model: batch reconstruction plus two-view relative pose queries. A real
// model adapter can be slotted in behind this without touching the pipeline.
class ReconstructionProvider {
 public:
  virtual ~ReconstructionProvider() = default;

  // Reconstructs a batch of >= 2 frames in a local frame anchored at the
  // first frame. Throws ReconstructionFailedError on (simulated) failure.
  virtual RoomReconstruction reconstruct_batch(
      const std::vector<FrameRecord>& frames) = 0;

  // Two-view query for the relative pose of frame q in frame p.
  virtual RelativePoseEstimate relative_pose(int frame_p, int frame_q) = 0;
};

// Conjugates a reconstruction by a pure scale: translations and points are
// multiplied by `scale`, rotations kept, the anchor stays at identity. This
// is exactly what an s-times-too-large monocular reconstruction looks like.
RoomReconstruction scale_reconstruction(const RoomReconstruction& recon,
                                        double scale);

// Replays reconstructions produced offline. Directory layout:
//   <dir>/batch_<anchor frame id>/poses.tum   (frame id in the stamp column)
//   <dir>/batch_<anchor frame id>/points.ply
//   <dir>/pairs.txt   lines `p q tx ty tz qx qy qz qw s` (optional)
class ReplayProvider : public ReconstructionProvider {
 public:
  explicit ReplayProvider(const std::filesystem::path& dir);

  RoomReconstruction reconstruct_batch(
      const std::vector<FrameRecord>& frames) override;
  RelativePoseEstimate relative_pose(int frame_p, int frame_q) override;

 private:
  std::filesystem::path dir_;
  std::map<std::pair<int, int>, Sim3> pairs_;
};

}  // namespace roomsg
