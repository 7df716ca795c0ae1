#include <doctest.h>

#include "roomsg/edges.hpp"
#include "roomsg/rng.hpp"
#include "test_helpers.hpp"

using namespace roomsg;
using namespace roomsg::testing;

namespace {

// Two consecutive room nodes built from a noiseless oracle, sharing overlap
// frames, plus the ground-truth transform between their local frames.
struct EdgeFixture {
  World world;
  SimulatedSequence seq;
  SceneGraph graph;
  std::unique_ptr<OracleProvider> oracle;
  int room_i = -1, room_j = -1;
  Sim3 gt_edge;

  EdgeFixture() {
    world = generate_world(fast_world_config(2), 13);
    SequenceSpec spec;
    spec.visit_order = {0, 1};
    seq = generate_sequence(world, spec);
    oracle = std::make_unique<OracleProvider>(world, seq.frames, zero_noise());

    auto batches = split_by_ground_truth(world, seq).batches;
    REQUIRE(batches.size() == 2);
    // Five shared overlap frames between the batches.
    auto& first = batches[0];
    auto& second = batches[1];
    std::vector<FrameRecord> overlap(first.end() - 5, first.end());
    second.insert(second.begin(), overlap.begin(), overlap.end() - 1);
    std::sort(second.begin(), second.end(),
              [](const FrameRecord& a, const FrameRecord& b) { return a.id < b.id; });
    second.erase(std::unique(second.begin(), second.end(),
                             [](const FrameRecord& a, const FrameRecord& b) {
                               return a.id == b.id;
                             }),
                 second.end());

    const CueSet cues = world.cue_set();
    room_i = add_room_from_batch(graph, *oracle, first, cues);
    room_j = add_room_from_batch(graph, *oracle, second, cues);

    // Noiseless unit-scale batches: the local frames are the anchor camera
    // frames, so the ground-truth edge is the anchors' relative pose.
    const int anchor_i = graph.room(room_i).local_frame_poses.begin()->first;
    const int anchor_j = graph.room(room_j).local_frame_poses.begin()->first;
    gt_edge = seq.frames[anchor_i].gt_pose->inverse() * *seq.frames[anchor_j].gt_pose;
  }
};

Sim3 small_exp(double a, double b, double c, double d, double e, double f, double g) {
  return sim3_exp(make_tangent({a, b, c}, {d, e, f}, g));
}

}  // namespace

TEST_CASE("pair selection covers overlap self-pairs first") {
  EdgeFixture fix;
  const RoomNode& a = fix.graph.room(fix.room_i);
  const RoomNode& b = fix.graph.room(fix.room_j);

  const auto pairs = select_transition_pairs(a, b, 3);
  CHECK(pairs.size() <= 9);
  REQUIRE(!pairs.empty());
  // Self-pairs lead; they are frames of room j present in room i.
  int self_pairs = 0;
  for (const auto& p : pairs) {
    if (p.frame_p == p.frame_q) {
      ++self_pairs;
      CHECK(a.local_frame_poses.count(p.frame_p));
      CHECK(b.local_frame_poses.count(p.frame_p));
    }
  }
  CHECK(self_pairs >= 1);
  for (int i = 0; i < self_pairs; ++i) CHECK(pairs[i].frame_p == pairs[i].frame_q);

  const auto single = select_transition_pairs(a, b, 1);
  CHECK(single.size() == 1);

  // Huge k: capped by the available cross product, no duplicates.
  const auto all = select_transition_pairs(a, b, 1000);
  std::set<std::pair<int, int>> unique_pairs;
  for (const auto& p : all) unique_pairs.emplace(p.frame_p, p.frame_q);
  CHECK(unique_pairs.size() == all.size());
}

TEST_CASE("pair selection without overlap pairs last with first") {
  Rng rng(61);
  RoomNode a, b;
  for (int i = 0; i < 10; ++i) {
    a.local_frame_poses[i] = Sim3::identity();
    b.local_frame_poses[100 + i] = Sim3::identity();
  }
  const auto pairs = select_transition_pairs(a, b, 1);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].frame_p == 9);
  CHECK(pairs[0].frame_q == 100);
}

TEST_CASE("noiseless estimates agree and match the ground-truth edge") {
  EdgeFixture fix;
  const RoomNode& a = fix.graph.room(fix.room_i);
  const RoomNode& b = fix.graph.room(fix.room_j);
  const auto pairs = select_transition_pairs(a, b, 3);
  const RoomEdge edge = estimate_transition_edges(a, b, pairs, *fix.oracle);

  REQUIRE(edge.estimates.size() >= 2);
  for (const auto& est : edge.estimates) {
    CHECK(sim3_distance(est, edge.estimates.front()) < 1e-9);
  }
  CHECK(sim3_distance(edge.consensus, fix.gt_edge) < 1e-9);

  // Direction consistency: the reverse edge is the inverse.
  const auto reverse_pairs = select_transition_pairs(b, a, 3);
  const RoomEdge reverse =
      estimate_transition_edges(b, a, reverse_pairs, *fix.oracle);
  CHECK(sim3_distance(reverse.consensus, edge.consensus.inverse()) < 1e-9);
}

TEST_CASE("self-pair on a shared frame gives the exact frame-pose quotient") {
  EdgeFixture fix;
  const RoomNode& a = fix.graph.room(fix.room_i);
  const RoomNode& b = fix.graph.room(fix.room_j);
  int shared = -1;
  for (const auto& [fid, pose] : b.local_frame_poses) {
    if (a.local_frame_poses.count(fid)) {
      shared = fid;
      break;
    }
  }
  REQUIRE(shared >= 0);
  const RoomEdge edge =
      estimate_transition_edges(a, b, {{shared, shared}}, *fix.oracle);
  const Sim3 expected =
      a.local_frame_poses.at(shared) * b.local_frame_poses.at(shared).inverse();
  CHECK(sim3_distance(edge.estimates.front(), expected) < 1e-12);
}

TEST_CASE("invalid pairs are skipped; all-invalid fails the edge") {
  EdgeFixture fix;
  const RoomNode& a = fix.graph.room(fix.room_i);
  const RoomNode& b = fix.graph.room(fix.room_j);
  const auto pairs = select_transition_pairs(a, b, 3);

  ProviderHooks hooks(*fix.oracle);
  hooks.fail_next_pairs(1);  // one pair dropped, the rest carry the edge
  const RoomEdge edge = estimate_transition_edges(a, b, pairs, hooks);
  CHECK(edge.estimates.size() == pairs.size() - 1);
  CHECK(sim3_distance(edge.consensus, fix.gt_edge) < 1e-9);

  hooks.fail_next_pairs(static_cast<int>(pairs.size()));
  CHECK_THROWS_AS(estimate_transition_edges(a, b, pairs, hooks),
                  EdgeEstimationFailedError);
}

TEST_CASE("aggregate: single estimate, symmetric pair, outlier rejection") {
  const Sim3 single = small_exp(0.4, -0.2, 0.1, 0.2, 0.1, -0.3, 0.2);
  CHECK(sim3_distance(aggregate_edge({single}), single) == 0.0);

  const Sim3Tangent xi = make_tangent({0.02, -0.01, 0.03}, {0.01, 0.02, -0.01}, 0.01);
  const Sim3 mean = aggregate_edge({sim3_exp(xi), sim3_exp(-xi)});
  CHECK(sim3_log(mean).norm() < 1e-6);

  std::vector<Sim3> estimates(9, single);
  estimates.push_back(small_exp(3.0, 2.0, -1.0, 0.8, -0.5, 0.3, 0.5));
  const Sim3 robust = aggregate_edge(estimates);
  CHECK(sim3_distance(robust, single) < 1e-6);
}

TEST_CASE("aggregation is permutation invariant") {
  Rng rng(62);
  std::vector<Sim3> estimates;
  const Sim3 base = small_exp(0.5, 0.2, -0.4, 0.3, -0.2, 0.1, 0.15);
  for (int i = 0; i < 7; ++i) {
    estimates.push_back(base * sim3_exp(0.02 * Sim3Tangent::Random()));
  }
  const Sim3 forward = aggregate_edge(estimates);
  std::reverse(estimates.begin(), estimates.end());
  const Sim3 backward = aggregate_edge(estimates);
  CHECK(sim3_distance(forward, backward) < 1e-9);
}
