#pragma once

#include <vector>

#include "roomsg/reconstruction.hpp"
#include "roomsg/scene_graph.hpp"

namespace roomsg {

// A boundary image pair straddling two rooms: frame_p from room i,
// frame_q from room j.
struct TransitionPair {
  int frame_p = -1;
  int frame_q = -1;
};

// Pairs the last k frames of room i with the first k frames of room j, up to
// k*k pairs. Frames of room j that are shared with room i (the carried
// overlap) are paired with themselves first, where the relative pose is the
// identity by construction.
std::vector<TransitionPair> select_transition_pairs(const RoomNode& room_i,
                                                    const RoomNode& room_j,
                                                    int k);

// Pairs frames of the two rooms by temporal proximity (used when the rooms
// are not temporally adjacent, e.g. re-verifying edges after a merge).
// Shared frames again pair with themselves first.
std::vector<TransitionPair> select_nearest_time_pairs(const RoomNode& room_i,
                                                      const RoomNode& room_j,
                                                      int k);

// One relative-transform estimate per valid pair: the pose of frame p in
// room i composed with the pair's relative pose and the inverse pose of
// frame q in room j. The estimates are aggregated into the edge consensus.
// Throws EdgeEstimationFailedError when no pair yields a valid estimate.
RoomEdge estimate_transition_edges(const RoomNode& room_i, const RoomNode& room_j,
                                   const std::vector<TransitionPair>& pairs,
                                   ReconstructionProvider& provider,
                                   RoomEdgeKind kind = RoomEdgeKind::kTransition);

struct AggregateConfig {
  int max_iterations = 10;
  double tolerance = 1e-12;
  double outlier_factor = 3.0;  // drop estimates beyond factor * median distance
};

// Geodesic mean of the estimates in the tangent space, iterated to
// convergence, with one round of median-distance outlier rejection.
Sim3 aggregate_edge(const std::vector<Sim3>& estimates,
                    const AggregateConfig& config = {});

}  // namespace roomsg
