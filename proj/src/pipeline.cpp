#include "roomsg/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "roomsg/edges.hpp"
#include "roomsg/objects.hpp"

namespace roomsg {

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>& timings) : timings_(&timings) {}
  void add(const std::string& stage, Clock::time_point from) {
    (*timings_)[stage] +=
        std::chrono::duration<double>(Clock::now() - from).count();
  }

 private:
  std::map<std::string, double>* timings_;
};

// Room (and cue-neutral) frame features for the loop-closure database:
// frames scored as transitions do not represent the room.
std::vector<FeatureVector> room_signature(const std::vector<FrameRecord>& frames,
                                          const CueSet& cues) {
  std::vector<FeatureVector> features;
  for (const auto& frame : frames) {
    if (score_frame(frame, cues).margin < 0) features.push_back(frame.feature);
  }
  return features;
}

RoomReconstruction reconstruct_with_retry(ReconstructionProvider& provider,
                                          const std::vector<FrameRecord>& batch,
                                          int batch_size, bool& ok) {
  const auto subsampled = subsample_batch(batch, batch_size);
  ok = true;
  try {
    return provider.reconstruct_batch(subsampled);
  } catch (const ReconstructionFailedError&) {
  }
  // One retry with a re-subsampled batch (the selection shifts by dropping
  // the leading frame when there is slack).
  try {
    if (static_cast<int>(batch.size()) > batch_size) {
      const std::vector<FrameRecord> shifted(batch.begin() + 1, batch.end());
      return provider.reconstruct_batch(subsample_batch(shifted, batch_size));
    }
    return provider.reconstruct_batch(subsampled);
  } catch (const ReconstructionFailedError&) {
    ok = false;
    return {};
  }
}

struct RoomStage {
  PipelineResult* result;
  const PipelineConfig* config;
  const CueSet* cues;
  ReconstructionProvider* provider;
  RoomDatabase db;
  int previous_room = -1;

  explicit RoomStage(PipelineResult& r, const PipelineConfig& c, const CueSet& cue,
                     ReconstructionProvider& p)
      : result(&r), config(&c), cues(&cue), provider(&p), db(c.loop_closure) {}

  void handle_batch(const RoomFinalized& event) {
    auto& res = *result;
    StageTimer timer(res.stage_timings);
    if (event.reason == FinalizeReason::kTransition) ++res.transitions_detected;

    const auto t_recon = Clock::now();
    bool ok = false;
    RoomReconstruction recon = reconstruct_with_retry(
        *provider, event.batch, config->pipeline.batch_size, ok);
    const auto subsampled =
        subsample_batch(event.batch, config->pipeline.batch_size);

    RoomNode node;
    node.finalized = true;
    node.valid = ok;
    if (ok) {
      node.local_frame_poses = recon.frame_poses;
      node.point_cloud = recon.points;
      for (const auto& f : subsampled) node.frame_timestamps[f.id] = f.timestamp;
      node.frame_features = room_signature(subsampled, *cues);
    }
    const int room_id = res.graph.add_room(std::move(node));
    res.room_batches[room_id] = event.batch;
    timer.add("reconstruction", t_recon);

    if (!ok) {
      ++res.invalid_rooms;
      res.errors.push_back("room " + std::to_string(room_id) +
                           ": reconstruction failed twice, marked invalid");
      previous_room = -1;  // the chain is interrupted
      return;
    }
    res.reconstructions[room_id] = std::move(recon);

    // Transition edge to the temporally previous room; odometry-chained
    // initial pose either way.
    const auto t_edges = Clock::now();
    if (previous_room >= 0 && res.graph.room(previous_room).valid) {
      const RoomNode& prev = res.graph.room(previous_room);
      RoomNode& cur = res.graph.room(room_id);
      try {
        const auto pairs = select_transition_pairs(prev, cur,
                                                   config->edges.pairs_per_side);
        RoomEdge edge =
            estimate_transition_edges(prev, cur, pairs, *provider);
        cur.reference_pose = prev.reference_pose * edge.consensus;
        res.graph.add_room_edge(std::move(edge));
      } catch (const EdgeEstimationFailedError& e) {
        cur.reference_pose = prev.reference_pose;
        res.errors.push_back("edge " + std::to_string(previous_room) + "->" +
                             std::to_string(room_id) + ": " + e.what());
      }
    }
    timer.add("transition_edges", t_edges);
    previous_room = room_id;

    if (!config->pipeline.enable_loop_closure) {
      db.insert(room_id, res.graph.room(room_id).frame_features);
      return;
    }

    const auto t_loop = Clock::now();
    const auto match = db.query(res.graph.room(room_id));
    bool merged = false;
    if (match) {
      try {
        const MergeCandidate candidate = merge_rooms(
            res.graph, *match, room_id, *provider, res.room_batches.at(*match),
            res.room_batches.at(room_id),
            {config->pipeline.batch_size, config->edges.pairs_per_side});
        if (verify_and_apply(res.graph, db, candidate)) {
          merged = true;
          ++res.loop_closures_accepted;
          const int merged_id = candidate.merged_node.id;
          res.room_batches.erase(*match);
          res.room_batches.erase(room_id);
          res.room_batches[merged_id] = candidate.merged_batch;
          res.reconstructions.erase(*match);
          res.reconstructions.erase(room_id);
          res.reconstructions[merged_id] = candidate.reconstruction;
          previous_room = merged_id;
          if (config->pipeline.optimize_per_loop_closure) {
            auto view = room_pose_graph_view(res.graph,
                                             config->pipeline.factor_per_estimate);
            optimize(view, config->pgo);
          }
        }
      } catch (const ReconstructionFailedError& e) {
        res.errors.push_back("merge of rooms " + std::to_string(*match) + "+" +
                             std::to_string(room_id) + " aborted: " + e.what());
      }
    }
    if (!merged) db.insert(room_id, res.graph.room(room_id).frame_features);
    timer.add("loop_closure", t_loop);
  }
};

// Tracklets are assigned to the room covering most of their observed frames.
std::map<int, std::vector<MaskTracklet>> assign_tracklets(
    const SceneGraph& graph, const std::vector<MaskTracklet>& tracklets) {
  std::map<int, std::vector<MaskTracklet>> by_room;
  for (const auto& tracklet : tracklets) {
    int best_room = -1;
    int best_hits = 0;
    for (const auto& [room_id, node] : graph.rooms()) {
      if (!node.valid) continue;
      int hits = 0;
      for (const auto& obs : tracklet.observations) {
        if (node.local_frame_poses.count(obs.frame_id)) ++hits;
      }
      if (hits > best_hits) {
        best_hits = hits;
        best_room = room_id;
      }
    }
    if (best_room >= 0) by_room[best_room].push_back(tracklet);
  }
  return by_room;
}

void assemble_trajectory(PipelineResult& result) {
  // Earliest room (lowest id) wins for frames present in several rooms.
  std::map<int, std::pair<double, Sim3>> poses;  // frame id -> (t, world pose)
  for (const auto& [room_id, node] : result.graph.rooms()) {
    if (!node.valid) continue;
    for (const auto& [fid, local] : node.local_frame_poses) {
      if (poses.count(fid)) continue;
      const double t = node.frame_timestamps.count(fid)
                           ? node.frame_timestamps.at(fid)
                           : static_cast<double>(fid);
      poses.emplace(fid, std::make_pair(t, node.reference_pose * local));
    }
  }
  for (const auto& [fid, entry] : poses) {
    result.trajectory.append(entry.first, entry.second);
  }
}

PipelineResult run_room_based(const PipelineConfig& config,
                              const PipelineInput& input,
                              ReconstructionProvider& provider) {
  PipelineResult result;
  StageTimer timer(result.stage_timings);
  const auto t_total = Clock::now();

  RoomStage stage(result, config, input.cues, provider);
  RoomSegmenter segmenter(config.segmenter, input.cues);
  {
    for (const auto& frame : input.frames) {
      const auto t_seg = Clock::now();
      auto event = segmenter.step(frame);
      timer.add("segmentation", t_seg);
      if (event) stage.handle_batch(*event);
    }
    const auto t_seg = Clock::now();
    auto tail = segmenter.flush();
    timer.add("segmentation", t_seg);
    if (tail) stage.handle_batch(*tail);
  }

  if (config.pipeline.enable_objects && !input.tracklets.tracklets.empty()) {
    const auto t_obj = Clock::now();
    const auto by_room = assign_tracklets(result.graph, input.tracklets.tracklets);
    for (const auto& [room_id, tracklets] : by_room) {
      populate_room(result.graph, room_id, tracklets,
                    result.reconstructions.at(room_id), config.objects);
    }
    timer.add("objects", t_obj);
  }

  {
    const auto t_opt = Clock::now();
    auto view = room_pose_graph_view(result.graph, config.pipeline.factor_per_estimate);
    if (!view.factors().empty() || view.room_ids().size() <= 1) {
      result.opt_report = optimize(view, config.pgo);
    } else {
      result.errors.push_back("optimization skipped: no factors");
    }
    timer.add("optimization", t_opt);
  }

  assemble_trajectory(result);
  timer.add("total", t_total);
  return result;
}

PipelineResult run_sliding_window(const PipelineConfig& config,
                                  const PipelineInput& input,
                                  ReconstructionProvider& provider) {
  PipelineResult result;
  StageTimer timer(result.stage_timings);
  const auto t_total = Clock::now();

  const int window = config.pipeline.batch_size;
  const int overlap = config.segmenter.overlap_count;
  const int advance = std::max(1, window - overlap);
  const int n = static_cast<int>(input.frames.size());

  Sim3 chain_pose;  // world <- current window frame
  int previous_room = -1;
  for (int start = 0; start < n; start += advance) {
    const int end = std::min(n, start + window);
    if (end - start < 2) break;
    std::vector<FrameRecord> batch(input.frames.begin() + start,
                                   input.frames.begin() + end);

    const auto t_recon = Clock::now();
    bool ok = false;
    RoomReconstruction recon =
        reconstruct_with_retry(provider, batch, window, ok);
    timer.add("reconstruction", t_recon);

    RoomNode node;
    node.finalized = true;
    node.valid = ok;
    if (ok) {
      node.local_frame_poses = recon.frame_poses;
      node.point_cloud = recon.points;
      for (const auto& f : batch) node.frame_timestamps[f.id] = f.timestamp;
    }
    const int room_id = result.graph.add_room(std::move(node));
    result.room_batches[room_id] = batch;
    if (!ok) {
      ++result.invalid_rooms;
      result.errors.push_back("window " + std::to_string(room_id) +
                              ": reconstruction failed twice");
      previous_room = -1;
      if (end >= n) break;
      continue;
    }
    result.reconstructions[room_id] = std::move(recon);

    // Chain by the relative poses of the shared overlap frames.
    const auto t_edges = Clock::now();
    if (previous_room >= 0) {
      const RoomNode& prev = result.graph.room(previous_room);
      RoomNode& cur = result.graph.room(room_id);
      std::vector<Sim3> estimates;
      for (const auto& [fid, pose] : cur.local_frame_poses) {
        const auto it = prev.local_frame_poses.find(fid);
        if (it != prev.local_frame_poses.end()) {
          estimates.push_back(it->second * pose.inverse());
        }
      }
      if (!estimates.empty()) {
        RoomEdge edge;
        edge.room_i = previous_room;
        edge.room_j = room_id;
        edge.estimates = estimates;
        edge.consensus = aggregate_edge(estimates);
        cur.reference_pose = prev.reference_pose * edge.consensus;
        result.graph.add_room_edge(std::move(edge));
      } else {
        cur.reference_pose = prev.reference_pose;
        result.errors.push_back("window " + std::to_string(room_id) +
                                ": no shared frame with predecessor");
      }
    }
    timer.add("transition_edges", t_edges);
    previous_room = room_id;
    if (end >= n) break;
  }

  assemble_trajectory(result);
  timer.add("total", t_total);
  return result;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, const PipelineInput& input,
                            ReconstructionProvider& provider) {
  if (input.frames.empty()) {
    throw InvalidInputError("run_pipeline: empty frame stream");
  }
  if (config.pipeline.mode == PipelineMode::kSlidingWindow) {
    return run_sliding_window(config, input, provider);
  }
  return run_room_based(config, input, provider);
}

}  // namespace roomsg
