#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "roomsg/edges.hpp"
#include "roomsg/reconstruction.hpp"
#include "roomsg/scene_graph.hpp"

namespace roomsg {

struct LoopClosureConfig {
  double tau_s = 0.85;  // cosine similarity threshold per feature pair
  int tau_r = 10;       // matched-pair count a candidate must exceed
};

// Frame-feature database over finalized rooms, queried for revisits.
class RoomDatabase {
 public:
  explicit RoomDatabase(const LoopClosureConfig& config = {}) : config_(config) {}

  void insert(int room_id, std::vector<FeatureVector> features);
  void remove(int room_id);
  bool contains(int room_id) const { return entries_.count(room_id) > 0; }
  std::size_t size() const { return entries_.size(); }
  const LoopClosureConfig& config() const { return config_; }

  // Cross pairs (one feature from each room) with cosine >= tau_s are
  // counted per entry; the entry with the highest count wins if it exceeds
  // tau_r. Ties break toward the lower room id.
  std::optional<int> query(const RoomNode& new_room) const;

  // Matched-pair count between a stored entry and a feature list.
  int pair_count(int room_id, const std::vector<FeatureVector>& features) const;

 private:
  std::map<int, std::vector<FeatureVector>> entries_;
  LoopClosureConfig config_;
};

struct MergeConfig {
  int batch_size = 60;      // merged batch is re-subsampled to this
  int pairs_per_side = 3;   // boundary frames per side when re-verifying
};

// A proposed replacement of two matched rooms by one merged node, together
// with the re-verified edges to every neighbor. Nothing is applied to the
// graph until verify_and_apply accepts it.
struct MergeCandidate {
  int room_a = -1;  // matched database room
  int room_b = -1;  // newly finalized room
  RoomNode merged_node;  // carries the id it will take when applied
  RoomReconstruction reconstruction;
  std::vector<FrameRecord> merged_batch;  // deduplicated, time-ordered
  std::set<int> required_neighbors;       // rooms adjacent to a or b
  std::vector<RoomEdge> reverified_edges; // one per successfully re-estimated neighbor
};

// Reconstructs the union of both rooms' frames as one batch and re-estimates
// an edge from the merged node to every neighbor of either room. Edge
// failures leave gaps in reverified_edges (verify_and_apply then rejects).
// Throws ReconstructionFailedError when the merged batch cannot be
// reconstructed; the graph is never touched here.
MergeCandidate merge_rooms(const SceneGraph& graph, int room_a, int room_b,
                           ReconstructionProvider& provider,
                           const std::vector<FrameRecord>& frames_a,
                           const std::vector<FrameRecord>& frames_b,
                           const MergeConfig& config = {});

// Applies the merge atomically when every required neighbor edge was
// re-verified: removes both originals with their edges, inserts the merged
// node and its loop-closure edges, and swaps the database entries. On any
// missing edge the graph and database are left untouched and false is
// returned.
bool verify_and_apply(SceneGraph& graph, RoomDatabase& db,
                      const MergeCandidate& candidate);

}  // namespace roomsg
