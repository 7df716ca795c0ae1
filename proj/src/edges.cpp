#include "roomsg/edges.hpp"

#include <algorithm>
#include <set>

namespace roomsg {

namespace {

std::vector<int> ordered_frame_ids(const RoomNode& room) {
  std::vector<int> ids;
  ids.reserve(room.local_frame_poses.size());
  for (const auto& [fid, pose] : room.local_frame_poses) ids.push_back(fid);
  return ids;  // map iteration is already id-ordered
}

}  // namespace

std::vector<TransitionPair> select_transition_pairs(const RoomNode& room_i,
                                                    const RoomNode& room_j,
                                                    int k) {
  if (k < 1) throw InvalidInputError("select_transition_pairs: k must be >= 1");
  const auto ids_i = ordered_frame_ids(room_i);
  const auto ids_j = ordered_frame_ids(room_j);
  if (ids_i.empty() || ids_j.empty()) {
    throw InvalidInputError("select_transition_pairs: empty room batch");
  }

  const int ni = static_cast<int>(ids_i.size());
  const int nj = static_cast<int>(ids_j.size());
  std::vector<int> last_i(ids_i.end() - std::min(k, ni), ids_i.end());
  std::vector<int> first_j(ids_j.begin(), ids_j.begin() + std::min(k, nj));

  std::vector<TransitionPair> pairs;
  std::set<std::pair<int, int>> seen;
  const auto add = [&](int p, int q) {
    if (seen.emplace(p, q).second) pairs.push_back({p, q});
  };

  // Overlap frames first: a frame of room j that also lives in room i pairs
  // with itself.
  for (const int q : first_j) {
    if (room_i.local_frame_poses.count(q)) add(q, q);
  }
  for (const int p : last_i) {
    for (const int q : first_j) {
      if (static_cast<int>(pairs.size()) >= k * k) return pairs;
      if (p == q) continue;
      add(p, q);
    }
  }
  return pairs;
}

std::vector<TransitionPair> select_nearest_time_pairs(const RoomNode& room_i,
                                                      const RoomNode& room_j,
                                                      int k) {
  if (k < 1) throw InvalidInputError("select_nearest_time_pairs: k must be >= 1");
  if (room_i.local_frame_poses.empty() || room_j.local_frame_poses.empty()) {
    throw InvalidInputError("select_nearest_time_pairs: empty room batch");
  }

  std::vector<TransitionPair> pairs;
  std::set<std::pair<int, int>> seen;
  // Shared frames first.
  for (const auto& [q, pose] : room_j.local_frame_poses) {
    if (room_i.local_frame_poses.count(q)) {
      if (seen.emplace(q, q).second) pairs.push_back({q, q});
      if (static_cast<int>(pairs.size()) >= k * k) return pairs;
    }
  }

  struct Candidate {
    double dt;
    int p, q;
  };
  std::vector<Candidate> candidates;
  for (const auto& [p, pose_p] : room_i.local_frame_poses) {
    const double tp = room_i.frame_timestamps.count(p)
                          ? room_i.frame_timestamps.at(p)
                          : static_cast<double>(p);
    for (const auto& [q, pose_q] : room_j.local_frame_poses) {
      if (p == q) continue;
      const double tq = room_j.frame_timestamps.count(q)
                            ? room_j.frame_timestamps.at(q)
                            : static_cast<double>(q);
      candidates.push_back({std::abs(tp - tq), p, q});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    return a.dt != b.dt ? a.dt < b.dt : std::tie(a.p, a.q) < std::tie(b.p, b.q);
  });
  for (const auto& c : candidates) {
    if (static_cast<int>(pairs.size()) >= k * k) break;
    if (seen.emplace(c.p, c.q).second) pairs.push_back({c.p, c.q});
  }
  return pairs;
}

RoomEdge estimate_transition_edges(const RoomNode& room_i, const RoomNode& room_j,
                                   const std::vector<TransitionPair>& pairs,
                                   ReconstructionProvider& provider,
                                   RoomEdgeKind kind) {
  RoomEdge edge;
  edge.room_i = room_i.id;
  edge.room_j = room_j.id;
  edge.kind = kind;
  for (const auto& pair : pairs) {
    const auto it_p = room_i.local_frame_poses.find(pair.frame_p);
    const auto it_q = room_j.local_frame_poses.find(pair.frame_q);
    if (it_p == room_i.local_frame_poses.end() ||
        it_q == room_j.local_frame_poses.end()) {
      throw InvalidInputError("estimate_transition_edges: pair frame missing from "
                              "room pose maps");
    }
    const RelativePoseEstimate rel = provider.relative_pose(pair.frame_p, pair.frame_q);
    if (!rel.valid) continue;
    edge.estimates.push_back(it_p->second * rel.pose * it_q->second.inverse());
  }
  if (edge.estimates.empty()) {
    throw EdgeEstimationFailedError(
        "estimate_transition_edges: no valid pair between rooms " +
        std::to_string(room_i.id) + " and " + std::to_string(room_j.id));
  }
  edge.consensus = aggregate_edge(edge.estimates);
  return edge;
}

namespace {

Sim3 geodesic_mean(const std::vector<Sim3>& estimates, const AggregateConfig& config) {
  Sim3 mean = estimates.front();
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    Sim3Tangent delta = Sim3Tangent::Zero();
    const Sim3 mean_inv = mean.inverse();
    for (const auto& est : estimates) delta += sim3_log(mean_inv * est);
    delta /= static_cast<double>(estimates.size());
    mean = mean * sim3_exp(delta);
    if (delta.norm() < config.tolerance) break;
  }
  return mean;
}

}  // namespace

Sim3 aggregate_edge(const std::vector<Sim3>& estimates, const AggregateConfig& config) {
  if (estimates.empty()) throw InvalidInputError("aggregate_edge: no estimates");
  if (estimates.size() == 1) return estimates.front();

  Sim3 mean = geodesic_mean(estimates, config);

  // One round of outlier rejection against the median tangent distance.
  std::vector<double> dists;
  const Sim3 mean_inv = mean.inverse();
  dists.reserve(estimates.size());
  for (const auto& est : estimates) dists.push_back(sim3_log(mean_inv * est).norm());
  std::vector<double> sorted = dists;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];

  std::vector<Sim3> kept;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (dists[i] <= config.outlier_factor * median + 1e-15) {
      kept.push_back(estimates[i]);
    }
  }
  if (kept.empty() || kept.size() == estimates.size()) return mean;
  return geodesic_mean(kept, config);
}

}  // namespace roomsg
