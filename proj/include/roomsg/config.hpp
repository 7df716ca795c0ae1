#pragma once

#include <filesystem>
#include <string>

#include "roomsg/eval.hpp"
#include "roomsg/loop_closure.hpp"
#include "roomsg/objects.hpp"
#include "roomsg/pgo.hpp"
#include "roomsg/reconstruction.hpp"
#include "roomsg/segmenter.hpp"
#include "roomsg/simulator.hpp"

namespace roomsg {

enum class PipelineMode { kRoomBased, kSlidingWindow };

struct EdgesConfig {
  int pairs_per_side = 3;  // up to pairs_per_side^2 transition pairs
};

struct PipelineOptions {
  PipelineMode mode = PipelineMode::kRoomBased;
  int batch_size = 60;  // frames per batch after subsampling
  bool enable_loop_closure = true;
  bool enable_objects = true;
  bool optimize_per_loop_closure = false;  // default: once after stream end
  bool factor_per_estimate = true;         // else one consensus factor per edge
};

// Whole-run configuration, one section per stage. Loaded from JSON; unknown
// keys are rejected and ROOMSG_<SECTION>__<KEY> environment variables
// override individual values.
struct PipelineConfig {
  WorldConfig world;
  SequenceSpec sequence;
  SegmenterConfig segmenter;
  OracleNoiseModel oracle;
  EdgesConfig edges;
  LoopClosureConfig loop_closure;
  PgoConfig pgo;
  ObjectsConfig objects;
  PipelineOptions pipeline;
  EvalConfig eval;

  void validate() const;
};

PipelineConfig parse_config(const std::string& json_text,
                            bool apply_env_overrides = true);
PipelineConfig load_config(const std::filesystem::path& path,
                           bool apply_env_overrides = true);
std::string config_to_json(const PipelineConfig& config);

}  // namespace roomsg
