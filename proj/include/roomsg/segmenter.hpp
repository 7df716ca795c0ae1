#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "roomsg/errors.hpp"
#include "roomsg/scene_graph.hpp"
#include "roomsg/sim3.hpp"

namespace roomsg {

// One monocular observation: a precomputed (or simulated) unit feature
// vector plus optional simulation-only ground truth.
struct FrameRecord {
  int id = -1;
  double timestamp = 0.0;
  FeatureVector feature;
  std::optional<Sim3> gt_pose;  // world <- camera, scale 1
  std::optional<int> gt_room;   // absent while inside a connector
};

struct Cue {
  std::string label;
  FeatureVector embedding;  // unit norm
};

// Text-embedding stand-ins scored against each frame: transition cues
// (doorways, corridors) versus room cues.
struct CueSet {
  std::vector<Cue> transition_cues;
  std::vector<Cue> room_cues;
};

struct FrameScore {
  std::string label;  // best cue over both lists
  double margin = 0.0;  // best transition similarity - best room similarity
  bool is_transition = false;  // true when the best cue is a transition cue
};

// Cosine scoring of a frame against all cues. Ties keep the earlier cue
// (transition list first).
FrameScore score_frame(const FrameRecord& frame, const CueSet& cues);

struct SegmenterConfig {
  double increment = 1.0;          // confidence gain on transition-labeled frames
  double decay = 0.5;              // confidence loss otherwise
  double trigger_threshold = 4.0;  // finalize once confidence reaches this
  double confidence_max = 8.0;
  int overlap_count = 5;       // frames carried into the next batch
  int min_batch_size = 12;     // no finalization below this many frames
  int max_batch_size = 240;    // forced finalization guard
};

enum class FinalizeReason { kTransition, kForced, kFlush };

struct RoomFinalized {
  std::vector<FrameRecord> batch;          // all frames of the finalized room
  std::vector<FrameRecord> overlap_frames; // tail copied into the next batch
  FinalizeReason reason = FinalizeReason::kTransition;
};

// Hysteresis batching of the frame stream: a running confidence score rises
// on transition-scored frames and decays otherwise; crossing the trigger
// threshold finalizes the accumulated batch and carries the tail forward as
// overlap into the next one.
class RoomSegmenter {
 public:
  explicit RoomSegmenter(const SegmenterConfig& config, const CueSet& cues)
      : config_(config), cues_(cues) {
    if (config.increment <= 0 || config.decay < 0 ||
        config.trigger_threshold <= 0 ||
        config.confidence_max < config.trigger_threshold ||
        config.overlap_count < 0 || config.min_batch_size < 2 ||
        config.max_batch_size < config.min_batch_size) {
      throw ConfigError("RoomSegmenter: inconsistent hysteresis configuration");
    }
  }

  // Feeds one frame; returns a finalized room when the hysteresis triggers
  // or the batch hits max_batch_size. Frame ids must be strictly increasing.
  std::optional<RoomFinalized> step(const FrameRecord& frame);

  // Finalizes the trailing batch at end of stream, if it contains at least
  // two frames and is not made of carried-over overlap alone.
  std::optional<RoomFinalized> flush();

  double confidence() const { return confidence_; }
  const std::vector<FrameRecord>& current_batch() const { return batch_; }
  const SegmenterConfig& config() const { return config_; }

 private:
  RoomFinalized finalize(FinalizeReason reason);

  SegmenterConfig config_;
  CueSet cues_;
  double confidence_ = 0.0;
  std::vector<FrameRecord> batch_;
  int last_frame_id_ = -1;
  int carried_overlap_ = 0;  // leading frames of batch_ already emitted
};

// Uniform-stride selection preserving the first and last frames; returns the
// whole batch when it is not larger than target_count.
std::vector<FrameRecord> subsample_batch(const std::vector<FrameRecord>& batch,
                                         int target_count);

// Binary feature matrix (row-major float32) with a JSON sidecar listing
// frame ids, timestamps, and the feature dimension.
void write_feature_file(const std::filesystem::path& bin_path,
                        const std::vector<FrameRecord>& frames);
std::vector<FrameRecord> read_feature_file(const std::filesystem::path& bin_path);

}  // namespace roomsg
