#include "roomsg/loop_closure.hpp"

#include <algorithm>

#include "roomsg/segmenter.hpp"

namespace roomsg {

void RoomDatabase::insert(int room_id, std::vector<FeatureVector> features) {
  if (entries_.count(room_id)) {
    throw StructuralError("RoomDatabase: room " + std::to_string(room_id) +
                          " already stored");
  }
  entries_.emplace(room_id, std::move(features));
}

void RoomDatabase::remove(int room_id) { entries_.erase(room_id); }

int RoomDatabase::pair_count(int room_id,
                             const std::vector<FeatureVector>& features) const {
  const auto it = entries_.find(room_id);
  if (it == entries_.end()) {
    throw LookupError("RoomDatabase: unknown room " + std::to_string(room_id));
  }
  int count = 0;
  for (const auto& a : it->second) {
    const double na = a.norm();
    if (na < 1e-12) continue;
    for (const auto& b : features) {
      const double nb = b.norm();
      if (nb < 1e-12) continue;
      if (a.dot(b) / (na * nb) >= config_.tau_s) ++count;
    }
  }
  return count;
}

std::optional<int> RoomDatabase::query(const RoomNode& new_room) const {
  if (contains(new_room.id)) {
    throw InvalidInputError("RoomDatabase::query: room " +
                            std::to_string(new_room.id) + " is already stored");
  }
  std::optional<int> best;
  int best_count = config_.tau_r;  // must strictly exceed tau_r
  for (const auto& [room_id, features] : entries_) {
    const int count = pair_count(room_id, new_room.frame_features);
    if (count > best_count) {
      best = room_id;
      best_count = count;
    }
  }
  return best;
}

MergeCandidate merge_rooms(const SceneGraph& graph, int room_a, int room_b,
                           ReconstructionProvider& provider,
                           const std::vector<FrameRecord>& frames_a,
                           const std::vector<FrameRecord>& frames_b,
                           const MergeConfig& config) {
  if (room_a == room_b) throw InvalidInputError("merge_rooms: identical rooms");
  const RoomNode& node_a = graph.room(room_a);
  const RoomNode& node_b = graph.room(room_b);
  if (!node_a.finalized || !node_b.finalized) {
    throw InvalidInputError("merge_rooms: both rooms must be finalized");
  }

  MergeCandidate candidate;
  candidate.room_a = room_a;
  candidate.room_b = room_b;

  // Unified batch: union of both rooms' frames, deduplicated, time-ordered,
  // then re-subsampled like any other batch.
  std::map<int, FrameRecord> unified;
  for (const auto& f : frames_a) unified.emplace(f.id, f);
  for (const auto& f : frames_b) unified.emplace(f.id, f);
  candidate.merged_batch.reserve(unified.size());
  for (auto& [id, f] : unified) candidate.merged_batch.push_back(std::move(f));
  const auto subsampled = subsample_batch(candidate.merged_batch, config.batch_size);

  candidate.reconstruction = provider.reconstruct_batch(subsampled);

  RoomNode merged;
  merged.id = std::max(graph.next_room_id(),
                       std::max(room_a, room_b) + 1);  // fresh id on apply
  merged.finalized = true;
  merged.local_frame_poses = candidate.reconstruction.frame_poses;
  for (const auto& f : subsampled) merged.frame_timestamps[f.id] = f.timestamp;
  merged.point_cloud = candidate.reconstruction.points;
  merged.frame_features = node_a.frame_features;
  merged.frame_features.insert(merged.frame_features.end(),
                               node_b.frame_features.begin(),
                               node_b.frame_features.end());
  candidate.merged_node = std::move(merged);

  for (const int n : graph.neighbors(room_a)) {
    if (n != room_a && n != room_b) candidate.required_neighbors.insert(n);
  }
  for (const int n : graph.neighbors(room_b)) {
    if (n != room_a && n != room_b) candidate.required_neighbors.insert(n);
  }

  for (const int neighbor : candidate.required_neighbors) {
    const RoomNode& other = graph.room(neighbor);
    try {
      const auto pairs = select_nearest_time_pairs(candidate.merged_node, other,
                                                   config.pairs_per_side);
      RoomEdge edge = estimate_transition_edges(candidate.merged_node, other, pairs,
                                                provider, RoomEdgeKind::kLoopClosure);
      candidate.reverified_edges.push_back(std::move(edge));
    } catch (const EdgeEstimationFailedError&) {
      // Missing edge; verify_and_apply will reject the candidate.
    }
  }
  return candidate;
}

bool verify_and_apply(SceneGraph& graph, RoomDatabase& db,
                      const MergeCandidate& candidate) {
  std::set<int> verified;
  for (const auto& e : candidate.reverified_edges) verified.insert(e.room_j);
  for (const int neighbor : candidate.required_neighbors) {
    if (!verified.count(neighbor)) return false;  // graph stays unmodified
  }

  graph.remove_room(candidate.room_a);
  graph.remove_room(candidate.room_b);
  graph.add_room(candidate.merged_node);
  for (const auto& e : candidate.reverified_edges) graph.add_room_edge(e);

  db.remove(candidate.room_a);
  db.remove(candidate.room_b);
  db.insert(candidate.merged_node.id, candidate.merged_node.frame_features);
  return true;
}

}  // namespace roomsg
