#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "roomsg/point_cloud.hpp"
#include "roomsg/rng.hpp"
#include "roomsg/segmenter.hpp"
#include "roomsg/tracklet.hpp"
#include "roomsg/trajectory.hpp"

namespace roomsg {

// Desk-scale synthetic indoor worlds: axis-aligned rectangular rooms hung
// off a central corridor spine, each with a doorway onto the corridor,
// furnished with box objects and sampled into labeled surface clouds.

struct WorldConfig {
  int n_rooms = 5;
  std::array<double, 2> room_width_range = {4.0, 6.0};
  std::array<double, 2> room_depth_range = {3.0, 5.0};
  double wall_height = 2.5;
  double corridor_width = 2.0;
  double door_width = 1.0;
  double room_gap = 1.0;        // spacing between adjacent rooms on the spine
  double wall_density = 400.0;  // surface samples per m^2
  int feature_dim = 32;
  std::array<int, 2> objects_per_room = {2, 6};
  std::array<double, 2> object_extent_range = {0.3, 1.0};
  int points_per_object = 160;
  double visibility_radius = 6.0;
  double max_spine_length = 400.0;
};

struct RoomBox {
  int id = -1;
  Eigen::Vector3d lo, hi;  // axis-aligned extent
  double door_x = 0.0;     // door center along the spine
  int side = +1;           // +1 above the corridor, -1 below

  Eigen::Vector3d center() const { return 0.5 * (lo + hi); }
  bool contains(const Eigen::Vector3d& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() &&
           p.y() <= hi.y();
  }
};

struct SimObject {
  int id = -1;
  int room = -1;
  Eigen::Vector3d center, half_extent;
  FeatureVector feature;  // unit norm, the object's semantic embedding
  std::string label;
};

struct Connector {
  int room_a = -1;
  int room_b = -1;
  std::string kind = "corridor";
};

struct WallSegment2d {
  Eigen::Vector2d a, b;
};

// A world point visible from some camera position, in the order pixels are
// assigned on the mask grid (objects first, then walls/floor).
struct VisiblePoint {
  int global_id = -1;  // stable across frames, used for batch deduplication
  Eigen::Vector3d position;
  int label = 0;       // room id, or -1 for corridor geometry
  int object_id = -1;  // -1 for structural points
};

class World {
 public:
  WorldConfig config;
  std::uint64_t seed = 0;
  std::uint64_t sample_seed = 0;

  std::vector<RoomBox> rooms;
  double spine_x0 = 0.0, spine_x1 = 0.0;
  std::vector<Connector> connectors;
  std::vector<SimObject> objects;

  std::vector<FeatureVector> room_embeddings;
  FeatureVector doorway_cue;
  FeatureVector corridor_cue;

  // Derived geometry, rebuilt deterministically by build().
  PointCloud surface_points;  // walls + floors, labeled room id / -1
  std::vector<PointCloud> object_points;  // world frame, index = object id
  std::vector<WallSegment2d> wall_segments;

  // Samples surfaces and assembles wall segments from the stored layout.
  void build();

  // Room geometrically containing p, if any.
  std::optional<int> room_containing(const Eigen::Vector3d& p) const;
  // Feature region: doorway boxes take precedence, then rooms, then the
  // corridor. Room ids >= 0; kDoorway / kCorridor below.
  static constexpr int kCorridorRegion = -1;
  static constexpr int kDoorwayRegion = -2;
  int feature_region(const Eigen::Vector3d& p) const;
  // Region used for point visibility: room id or corridor.
  int visibility_region(const Eigen::Vector3d& p) const;

  // True when the 2D segment between two positions crosses no wall.
  bool line_of_sight(const Eigen::Vector3d& a, const Eigen::Vector3d& b) const;

  // Frame-to-frame co-visibility: within visibility radius and unobstructed.
  bool co_visible(const Eigen::Vector3d& a, const Eigen::Vector3d& b) const;

  // Points visible from a camera at `position`, in pixel order. Walls and
  // floor are stride-subsampled to at most `max_structural` entries.
  std::vector<VisiblePoint> visible_points(const Eigen::Vector3d& position,
                                           int max_structural = 240) const;

  // Mask grid dimensions for tracklets/pointmaps.
  int grid_width() const { return 64; }
  int grid_height() const { return 48; }

  // Transition and room cues derived from the world's embeddings.
  CueSet cue_set() const;

  // Labeled ground-truth cloud (room surfaces + objects, corridor excluded
  // from labels only in the sense of carrying label -1).
  PointCloud ground_truth_cloud() const;
  // Ground-truth cloud restricted to one room (its surfaces and objects).
  PointCloud ground_truth_room_cloud(int room_id) const;

  bool connected(int room_a, int room_b) const;

 private:
  Eigen::AlignedBox3d doorway_box(const RoomBox& room) const;
};

World generate_world(const WorldConfig& config, std::uint64_t seed);

void write_world(const std::filesystem::path& path, const World& world);
World read_world(const std::filesystem::path& path);

// --- sequences --------------------------------------------------------------

struct SequenceSpec {
  std::vector<int> visit_order;  // repeats allowed; revisits make loops
  int frames_per_room = 80;
  int frames_per_connector = 8;
  double feature_noise_sigma = 0.0;
  std::uint64_t rng_seed = 1;
  double fps = 30.0;
  double camera_height = 1.5;
  int tracklet_stride = 4;  // emit every n-th visible frame as an observation
};

struct SimulatedSequence {
  std::vector<FrameRecord> frames;  // features + ground truth filled in
  Trajectory gt_trajectory;
  TrackletSet tracklets;
  int connector_traversals = 0;
};

SimulatedSequence generate_sequence(const World& world, const SequenceSpec& spec);

}  // namespace roomsg
