#include "roomsg/segmenter.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>

#include <json.hpp>

namespace roomsg {

FrameScore score_frame(const FrameRecord& frame, const CueSet& cues) {
  if (cues.transition_cues.empty() && cues.room_cues.empty()) {
    throw InvalidInputError("score_frame: empty cue set");
  }
  const double norm = frame.feature.norm();
  if (norm < 1e-12) throw InvalidInputError("score_frame: zero feature vector");
  const FeatureVector f = frame.feature / norm;

  const auto best_of = [&](const std::vector<Cue>& list, const std::string& fallback) {
    double best = -2.0;
    std::string label = fallback;
    for (const auto& cue : list) {
      const double sim = f.dot(cue.embedding) / cue.embedding.norm();
      if (sim > best) {
        best = sim;
        label = cue.label;
      }
    }
    return std::make_pair(best, label);
  };

  const auto [best_transition, transition_label] =
      best_of(cues.transition_cues, "");
  const auto [best_room, room_label] = best_of(cues.room_cues, "");

  FrameScore score;
  score.margin = (cues.transition_cues.empty() ? -2.0 : best_transition) -
                 (cues.room_cues.empty() ? -2.0 : best_room);
  // Ties go to the transition list (it is scored first).
  score.is_transition = !cues.transition_cues.empty() && best_transition >= best_room;
  score.label = score.is_transition ? transition_label : room_label;
  return score;
}

std::optional<RoomFinalized> RoomSegmenter::step(const FrameRecord& frame) {
  if (frame.id <= last_frame_id_) {
    throw StreamOrderError("RoomSegmenter: frame id " + std::to_string(frame.id) +
                           " not greater than " + std::to_string(last_frame_id_));
  }
  last_frame_id_ = frame.id;

  const FrameScore score = score_frame(frame, cues_);
  if (score.margin > 0) {
    confidence_ = std::min(confidence_ + config_.increment, config_.confidence_max);
  } else {
    confidence_ = std::max(confidence_ - config_.decay, 0.0);
  }
  batch_.push_back(frame);

  const int size = static_cast<int>(batch_.size());
  if (confidence_ >= config_.trigger_threshold && size >= config_.min_batch_size) {
    return finalize(FinalizeReason::kTransition);
  }
  if (size >= config_.max_batch_size) {
    return finalize(FinalizeReason::kForced);
  }
  return std::nullopt;
}

std::optional<RoomFinalized> RoomSegmenter::flush() {
  // A trailing batch of nothing but carried-over overlap frames has already
  // been emitted in full with the previous room.
  if (static_cast<int>(batch_.size()) <= carried_overlap_ || batch_.size() < 2) {
    return std::nullopt;
  }
  RoomFinalized event;
  event.batch = std::move(batch_);
  event.reason = FinalizeReason::kFlush;
  batch_.clear();
  carried_overlap_ = 0;
  confidence_ = 0.0;
  return event;
}

RoomFinalized RoomSegmenter::finalize(FinalizeReason reason) {
  RoomFinalized event;
  event.reason = reason;
  event.batch = batch_;
  const int overlap =
      std::min<int>(config_.overlap_count, static_cast<int>(batch_.size()));
  event.overlap_frames.assign(batch_.end() - overlap, batch_.end());
  batch_ = event.overlap_frames;
  carried_overlap_ = overlap;
  confidence_ = 0.0;
  return event;
}

std::vector<FrameRecord> subsample_batch(const std::vector<FrameRecord>& batch,
                                         int target_count) {
  if (batch.empty()) throw InvalidInputError("subsample_batch: empty batch");
  if (target_count < 2) {
    throw InvalidInputError("subsample_batch: target_count must be >= 2");
  }
  const int n = static_cast<int>(batch.size());
  if (n <= target_count) return batch;
  std::vector<FrameRecord> out;
  out.reserve(target_count);
  for (int i = 0; i < target_count; ++i) {
    // Evenly spread indices hitting both endpoints.
    const int idx = static_cast<int>(std::llround(
        static_cast<double>(i) * (n - 1) / (target_count - 1)));
    out.push_back(batch[idx]);
  }
  return out;
}

void write_feature_file(const std::filesystem::path& bin_path,
                        const std::vector<FrameRecord>& frames) {
  if (frames.empty()) throw InvalidInputError("write_feature_file: no frames");
  const auto dim = frames.front().feature.size();
  nlohmann::json sidecar;
  sidecar["dim"] = dim;
  sidecar["count"] = frames.size();
  auto ids = nlohmann::json::array();
  auto stamps = nlohmann::json::array();
  for (const auto& f : frames) {
    if (f.feature.size() != dim) {
      throw InvalidInputError("write_feature_file: inconsistent feature dims");
    }
    ids.push_back(f.id);
    stamps.push_back(f.timestamp);
  }
  sidecar["frame_ids"] = std::move(ids);
  sidecar["timestamps"] = std::move(stamps);

  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw Error("cannot write " + bin_path.string());
  for (const auto& f : frames) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      const float v = static_cast<float>(f.feature[i]);
      bin.write(reinterpret_cast<const char*>(&v), sizeof(float));
    }
  }
  auto sidecar_path = bin_path;
  sidecar_path.replace_extension(".json");
  std::ofstream js(sidecar_path);
  if (!js) throw Error("cannot write " + sidecar_path.string());
  js << sidecar.dump(2) << "\n";
}

std::vector<FrameRecord> read_feature_file(const std::filesystem::path& bin_path) {
  auto sidecar_path = bin_path;
  sidecar_path.replace_extension(".json");
  std::ifstream js(sidecar_path);
  if (!js) throw ParseError("cannot open " + sidecar_path.string());
  nlohmann::json sidecar;
  try {
    js >> sidecar;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(sidecar_path.string() + ": " + e.what());
  }
  const auto dim = sidecar.at("dim").get<Eigen::Index>();
  const auto count = sidecar.at("count").get<std::size_t>();
  const auto& ids = sidecar.at("frame_ids");
  const auto& stamps = sidecar.at("timestamps");
  if (ids.size() != count || stamps.size() != count) {
    throw ParseError(sidecar_path.string() + ": frame_ids/timestamps size mismatch");
  }

  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw ParseError("cannot open " + bin_path.string());
  std::vector<FrameRecord> frames(count);
  for (std::size_t r = 0; r < count; ++r) {
    frames[r].id = ids[r].get<int>();
    frames[r].timestamp = stamps[r].get<double>();
    frames[r].feature.resize(dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
      float v;
      bin.read(reinterpret_cast<char*>(&v), sizeof(float));
      if (!bin) {
        throw ParseError(bin_path.string() + ": truncated at row " +
                         std::to_string(r));
      }
      frames[r].feature[c] = v;
    }
  }
  return frames;
}

}  // namespace roomsg
