#pragma once

#include <map>
#include <string>
#include <vector>

#include "roomsg/config.hpp"
#include "roomsg/eval.hpp"
#include "roomsg/loop_closure.hpp"
#include "roomsg/pgo.hpp"
#include "roomsg/reconstruction.hpp"
#include "roomsg/scene_graph.hpp"
#include "roomsg/tracklet.hpp"

namespace roomsg {

struct PipelineInput {
  std::vector<FrameRecord> frames;
  CueSet cues;
  TrackletSet tracklets;  // may be empty when the object stage is disabled
};

struct PipelineResult {
  SceneGraph graph;
  Trajectory trajectory;  // composed from room poses and per-frame local poses
  std::map<std::string, double> stage_timings;  // seconds, per executed stage
  int loop_closures_accepted = 0;
  int transitions_detected = 0;  // hysteresis-triggered finalizations
  int invalid_rooms = 0;
  OptReport opt_report;
  std::map<int, RoomReconstruction> reconstructions;      // room id -> output
  std::map<int, std::vector<FrameRecord>> room_batches;   // room id -> raw batch
  std::vector<std::string> errors;  // recorded stage errors (X convention)
};

// Runs the full pipeline over an ordered frame stream:
// segment -> reconstruct batch -> transition edges -> loop closure ->
// object population -> global optimization. Hard per-room errors are
// recorded and the pipeline continues with the remaining rooms.
// In sliding-window mode the stream is cut into fixed windows chained by
// overlap-frame relative poses instead (the ablation baseline).
PipelineResult run_pipeline(const PipelineConfig& config, const PipelineInput& input,
                            ReconstructionProvider& provider);

}  // namespace roomsg
