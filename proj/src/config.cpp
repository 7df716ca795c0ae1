#include "roomsg/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include <json.hpp>

namespace roomsg {

using nlohmann::json;

namespace {

// Tracks the section path and rejects keys no reader asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& value) {
    seen_.insert(key);
    const auto it = j_->find(key);
    if (it == j_->end()) return;
    try {
      value = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_->contains(key);
  }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_->at(key);
  }

  void done() const {
    for (const auto& [key, value] : j_->items()) {
      if (!seen_.count(key)) {
        throw ConfigError(path_ + ": unknown key `" + key + "`");
      }
    }
  }

 private:
  const json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_world(const json& j, WorldConfig& c) {
  Section s(j, "world");
  s.read("n_rooms", c.n_rooms);
  s.read("room_width_range", c.room_width_range);
  s.read("room_depth_range", c.room_depth_range);
  s.read("wall_height", c.wall_height);
  s.read("corridor_width", c.corridor_width);
  s.read("door_width", c.door_width);
  s.read("room_gap", c.room_gap);
  s.read("wall_density", c.wall_density);
  s.read("feature_dim", c.feature_dim);
  s.read("objects_per_room", c.objects_per_room);
  s.read("object_extent_range", c.object_extent_range);
  s.read("points_per_object", c.points_per_object);
  s.read("visibility_radius", c.visibility_radius);
  s.read("max_spine_length", c.max_spine_length);
  s.done();
}

void read_sequence(const json& j, SequenceSpec& c) {
  Section s(j, "sequence");
  s.read("visit_order", c.visit_order);
  s.read("frames_per_room", c.frames_per_room);
  s.read("frames_per_connector", c.frames_per_connector);
  s.read("feature_noise_sigma", c.feature_noise_sigma);
  s.read("rng_seed", c.rng_seed);
  s.read("fps", c.fps);
  s.read("camera_height", c.camera_height);
  s.read("tracklet_stride", c.tracklet_stride);
  s.done();
}

void read_segmenter(const json& j, SegmenterConfig& c) {
  Section s(j, "segmenter");
  s.read("increment", c.increment);
  s.read("decay", c.decay);
  s.read("trigger_threshold", c.trigger_threshold);
  s.read("confidence_max", c.confidence_max);
  s.read("overlap_count", c.overlap_count);
  s.read("min_batch_size", c.min_batch_size);
  s.read("max_batch_size", c.max_batch_size);
  s.done();
}

void read_oracle(const json& j, OracleNoiseModel& c) {
  Section s(j, "oracle");
  s.read("pose_rot_sigma", c.pose_rot_sigma);
  s.read("pose_trans_sigma", c.pose_trans_sigma);
  s.read("point_sigma", c.point_sigma);
  s.read("batch_scale_range", c.batch_scale_range);
  s.read("pair_failure_rate", c.pair_failure_rate);
  s.read("batch_failure_rate", c.batch_failure_rate);
  s.read("rng_seed", c.rng_seed);
  s.done();
}

void read_edges(const json& j, EdgesConfig& c) {
  Section s(j, "edges");
  s.read("pairs_per_side", c.pairs_per_side);
  s.done();
}

void read_loop_closure(const json& j, LoopClosureConfig& c) {
  Section s(j, "loop_closure");
  s.read("tau_s", c.tau_s);
  s.read("tau_r", c.tau_r);
  s.done();
}

void read_pgo(const json& j, PgoConfig& c) {
  Section s(j, "pgo");
  s.read("max_iterations", c.max_iterations);
  s.read("lambda_init", c.lambda_init);
  s.read("cost_tolerance", c.cost_tolerance);
  s.read("step_tolerance", c.step_tolerance);
  s.read("huber_delta", c.huber_delta);
  s.read("dense_node_limit", c.dense_node_limit);
  if (s.has("anchor")) {
    const auto& a = s.raw("anchor");
    if (!a.is_null()) c.anchor = a.get<int>();
  }
  s.done();
}

void read_objects(const json& j, ObjectsConfig& c) {
  Section s(j, "objects");
  s.read("iou_threshold", c.iou_threshold);
  s.read("min_views", c.min_views);
  s.read("min_points", c.min_points);
  s.read("voxel_size", c.voxel_size);
  s.done();
}

void read_pipeline(const json& j, PipelineOptions& c) {
  Section s(j, "pipeline");
  if (s.has("mode")) {
    const std::string mode = s.raw("mode").get<std::string>();
    if (mode == "room_based") {
      c.mode = PipelineMode::kRoomBased;
    } else if (mode == "sliding_window") {
      c.mode = PipelineMode::kSlidingWindow;
    } else {
      throw ConfigError("pipeline.mode: unknown mode `" + mode + "`");
    }
  }
  s.read("batch_size", c.batch_size);
  s.read("enable_loop_closure", c.enable_loop_closure);
  s.read("enable_objects", c.enable_objects);
  s.read("optimize_per_loop_closure", c.optimize_per_loop_closure);
  s.read("factor_per_estimate", c.factor_per_estimate);
  s.done();
}

void read_eval(const json& j, EvalConfig& c) {
  Section s(j, "eval");
  s.read("ate_max_dt", c.ate_max_dt);
  s.read("chamfer_truncation", c.chamfer_truncation);
  s.read("pr_match_radius", c.pr_match_radius);
  s.read("room_crop_margin", c.room_crop_margin);
  s.done();
}

// ROOMSG_<SECTION>__<KEY>=<json scalar> overrides one value.
void apply_env(json& doc) {
  extern char** environ;
  for (char** env = environ; *env != nullptr; ++env) {
    const std::string entry(*env);
    if (entry.rfind("ROOMSG_", 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string key = entry.substr(7, eq - 7);
    const std::string value = entry.substr(eq + 1);
    const auto sep = key.find("__");
    if (sep == std::string::npos) continue;
    std::string section = key.substr(0, sep);
    std::string field = key.substr(sep + 2);
    for (auto& c : section) c = static_cast<char>(std::tolower(c));
    for (auto& c : field) c = static_cast<char>(std::tolower(c));
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::parse_error&) {
      parsed = value;  // bare strings stay strings
    }
    doc[section][field] = parsed;
  }
}

}  // namespace

void PipelineConfig::validate() const {
  oracle.validate();
  if (pipeline.batch_size < 2) {
    throw ConfigError("pipeline.batch_size must be >= 2");
  }
  if (edges.pairs_per_side < 1) {
    throw ConfigError("edges.pairs_per_side must be >= 1");
  }
  if (loop_closure.tau_s < -1.0 || loop_closure.tau_s > 1.0 ||
      loop_closure.tau_r < 0) {
    throw ConfigError("loop_closure thresholds out of range");
  }
  // Segmenter consistency is checked by the RoomSegmenter constructor.
  (void)RoomSegmenter(segmenter, CueSet{{{"probe", FeatureVector::Ones(2)}}, {}});
}

PipelineConfig parse_config(const std::string& json_text, bool apply_env_overrides) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  if (apply_env_overrides) apply_env(doc);

  PipelineConfig config;
  {
    Section top(doc, "$");
    if (top.has("world")) read_world(top.raw("world"), config.world);
    if (top.has("sequence")) read_sequence(top.raw("sequence"), config.sequence);
    if (top.has("segmenter")) read_segmenter(top.raw("segmenter"), config.segmenter);
    if (top.has("oracle")) read_oracle(top.raw("oracle"), config.oracle);
    if (top.has("edges")) read_edges(top.raw("edges"), config.edges);
    if (top.has("loop_closure")) {
      read_loop_closure(top.raw("loop_closure"), config.loop_closure);
    }
    if (top.has("pgo")) read_pgo(top.raw("pgo"), config.pgo);
    if (top.has("objects")) read_objects(top.raw("objects"), config.objects);
    if (top.has("pipeline")) read_pipeline(top.raw("pipeline"), config.pipeline);
    if (top.has("eval")) read_eval(top.raw("eval"), config.eval);
    top.done();
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path,
                           bool apply_env_overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config(text, apply_env_overrides);
}

std::string config_to_json(const PipelineConfig& c) {
  json doc;
  doc["world"] = {{"n_rooms", c.world.n_rooms},
                  {"room_width_range", c.world.room_width_range},
                  {"room_depth_range", c.world.room_depth_range},
                  {"wall_height", c.world.wall_height},
                  {"corridor_width", c.world.corridor_width},
                  {"door_width", c.world.door_width},
                  {"room_gap", c.world.room_gap},
                  {"wall_density", c.world.wall_density},
                  {"feature_dim", c.world.feature_dim},
                  {"objects_per_room", c.world.objects_per_room},
                  {"object_extent_range", c.world.object_extent_range},
                  {"points_per_object", c.world.points_per_object},
                  {"visibility_radius", c.world.visibility_radius},
                  {"max_spine_length", c.world.max_spine_length}};
  doc["sequence"] = {{"visit_order", c.sequence.visit_order},
                     {"frames_per_room", c.sequence.frames_per_room},
                     {"frames_per_connector", c.sequence.frames_per_connector},
                     {"feature_noise_sigma", c.sequence.feature_noise_sigma},
                     {"rng_seed", c.sequence.rng_seed},
                     {"fps", c.sequence.fps},
                     {"camera_height", c.sequence.camera_height},
                     {"tracklet_stride", c.sequence.tracklet_stride}};
  doc["segmenter"] = {{"increment", c.segmenter.increment},
                      {"decay", c.segmenter.decay},
                      {"trigger_threshold", c.segmenter.trigger_threshold},
                      {"confidence_max", c.segmenter.confidence_max},
                      {"overlap_count", c.segmenter.overlap_count},
                      {"min_batch_size", c.segmenter.min_batch_size},
                      {"max_batch_size", c.segmenter.max_batch_size}};
  doc["oracle"] = {{"pose_rot_sigma", c.oracle.pose_rot_sigma},
                   {"pose_trans_sigma", c.oracle.pose_trans_sigma},
                   {"point_sigma", c.oracle.point_sigma},
                   {"batch_scale_range", c.oracle.batch_scale_range},
                   {"pair_failure_rate", c.oracle.pair_failure_rate},
                   {"batch_failure_rate", c.oracle.batch_failure_rate},
                   {"rng_seed", c.oracle.rng_seed}};
  doc["edges"] = {{"pairs_per_side", c.edges.pairs_per_side}};
  doc["loop_closure"] = {{"tau_s", c.loop_closure.tau_s},
                         {"tau_r", c.loop_closure.tau_r}};
  doc["pgo"] = {{"max_iterations", c.pgo.max_iterations},
                {"lambda_init", c.pgo.lambda_init},
                {"cost_tolerance", c.pgo.cost_tolerance},
                {"step_tolerance", c.pgo.step_tolerance},
                {"huber_delta", c.pgo.huber_delta},
                {"dense_node_limit", c.pgo.dense_node_limit},
                {"anchor", c.pgo.anchor ? json(*c.pgo.anchor) : json(nullptr)}};
  doc["objects"] = {{"iou_threshold", c.objects.iou_threshold},
                    {"min_views", c.objects.min_views},
                    {"min_points", c.objects.min_points},
                    {"voxel_size", c.objects.voxel_size}};
  doc["pipeline"] = {
      {"mode", c.pipeline.mode == PipelineMode::kRoomBased ? "room_based"
                                                           : "sliding_window"},
      {"batch_size", c.pipeline.batch_size},
      {"enable_loop_closure", c.pipeline.enable_loop_closure},
      {"enable_objects", c.pipeline.enable_objects},
      {"optimize_per_loop_closure", c.pipeline.optimize_per_loop_closure},
      {"factor_per_estimate", c.pipeline.factor_per_estimate}};
  doc["eval"] = {{"ate_max_dt", c.eval.ate_max_dt},
                 {"chamfer_truncation", c.eval.chamfer_truncation},
                 {"pr_match_radius", c.eval.pr_match_radius},
                 {"room_crop_margin", c.eval.room_crop_margin}};
  return doc.dump(2) + "\n";
}

}  // namespace roomsg
