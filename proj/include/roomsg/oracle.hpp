#pragma once

#include <map>

#include "roomsg/reconstruction.hpp"
#include "roomsg/rng.hpp"
#include "roomsg/simulator.hpp"

namespace roomsg {

// Synthetic reconstruction provider backed by simulator ground truth.
//
// Batch outputs are the true local poses and visible surface samples,
// distorted by a per-batch scale drawn from batch_scale_range (translations
// and points multiplied by s, rotations kept, anchor pinned at identity --
// the shape of a monocular reconstruction at the wrong scale) and then
// perturbed per the noise model. Two-view queries return the true relative
// pose with pose noise, or invalid when the frames share no co-visibility.
//
// Deterministic: a fixed seed and request sequence give identical outputs.
class OracleProvider : public ReconstructionProvider {
 public:
  OracleProvider(const World& world, const std::vector<FrameRecord>& frames,
                 const OracleNoiseModel& noise);

  RoomReconstruction reconstruct_batch(
      const std::vector<FrameRecord>& frames) override;
  RelativePoseEstimate relative_pose(int frame_p, int frame_q) override;

  // Scale factor applied to the n-th successful batch (for tests that need
  // the ground-truth gauge).
  const std::vector<double>& batch_scales() const { return batch_scales_; }

 private:
  const Sim3& gt_pose(int frame_id) const;

  const World* world_;
  std::map<int, Sim3> gt_poses_;
  OracleNoiseModel noise_;
  Rng rng_;
  std::vector<double> batch_scales_;
};

// Wraps a provider and forces specific batches or pair queries to fail /
// rescale; used to exercise failure and gauge-error paths.
class ProviderHooks : public ReconstructionProvider {
 public:
  explicit ProviderHooks(ReconstructionProvider& inner) : inner_(&inner) {}

  // Fails the n-th reconstruct_batch call (0-based).
  void fail_batch(int call_index) { failing_batches_.insert(call_index); }
  // Fails every relative_pose query while > 0, decremented per query.
  void fail_next_pairs(int count) { failing_pairs_ = count; }
  // Applies an extra scale distortion to the n-th batch (0-based).
  void scale_batch(int call_index, double scale) {
    scaled_batches_[call_index] = scale;
  }

  RoomReconstruction reconstruct_batch(
      const std::vector<FrameRecord>& frames) override {
    const int call = batch_calls_++;
    if (failing_batches_.count(call)) {
      throw ReconstructionFailedError("injected batch failure");
    }
    RoomReconstruction recon = inner_->reconstruct_batch(frames);
    const auto it = scaled_batches_.find(call);
    if (it != scaled_batches_.end()) recon = scale_reconstruction(recon, it->second);
    return recon;
  }

  RelativePoseEstimate relative_pose(int frame_p, int frame_q) override {
    if (failing_pairs_ > 0) {
      --failing_pairs_;
      return {};
    }
    return inner_->relative_pose(frame_p, frame_q);
  }

 private:
  ReconstructionProvider* inner_;
  std::set<int> failing_batches_;
  std::map<int, double> scaled_batches_;
  int failing_pairs_ = 0;
  int batch_calls_ = 0;
};

}  // namespace roomsg
