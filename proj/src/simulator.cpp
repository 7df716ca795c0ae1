#include "roomsg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "roomsg/errors.hpp"

namespace roomsg {

using nlohmann::json;

namespace {

constexpr double kDoorDepth = 0.45;      // doorway region reach on each side
constexpr double kDoorApproach = 0.5;    // waypoint offset from the shared wall
constexpr int kEllipseSegments = 48;

struct SurfaceRect {
  Eigen::Vector3d origin, edge_u, edge_v;
  int label = -1;
};

// Per-room object labels cycle through a fixed vocabulary.
const char* kObjectLabels[] = {"chair", "table",  "sofa", "plant",
                               "shelf", "lamp",   "desk", "cabinet"};

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                        const Eigen::Vector2d& q1, const Eigen::Vector2d& q2) {
  const Eigen::Vector2d r = p2 - p1;
  const Eigen::Vector2d s = q2 - q1;
  const double denom = cross2(r, s);
  const Eigen::Vector2d qp = q1 - p1;
  if (std::abs(denom) < 1e-12) return false;  // parallel: treat as clear
  const double t = cross2(qp, s) / denom;
  const double u = cross2(qp, r) / denom;
  return t > 1e-9 && t < 1.0 - 1e-9 && u > 1e-9 && u < 1.0 - 1e-9;
}

FeatureVector noisy_unit_feature(const FeatureVector& base, double sigma, Rng& rng) {
  if (sigma <= 0.0) return base;
  FeatureVector f = base;
  const double scale = sigma / std::sqrt(static_cast<double>(base.size()));
  for (int i = 0; i < f.size(); ++i) f[i] += scale * rng.normal();
  const double n = f.norm();
  return n > 0 ? FeatureVector(f / n) : base;
}

}  // namespace

// --- World ------------------------------------------------------------------

Eigen::AlignedBox3d World::doorway_box(const RoomBox& room) const {
  const double half_w = config.door_width / 2.0;
  const double y_wall = room.side > 0 ? room.lo.y() : room.hi.y();
  Eigen::Vector3d lo(room.door_x - half_w, y_wall - kDoorDepth, 0.0);
  Eigen::Vector3d hi(room.door_x + half_w, y_wall + kDoorDepth, config.wall_height);
  return {lo, hi};
}

std::optional<int> World::room_containing(const Eigen::Vector3d& p) const {
  for (const auto& room : rooms) {
    if (room.contains(p)) return room.id;
  }
  return std::nullopt;
}

int World::feature_region(const Eigen::Vector3d& p) const {
  for (const auto& room : rooms) {
    if (doorway_box(room).contains(p)) return kDoorwayRegion;
  }
  if (auto room = room_containing(p)) return *room;
  return kCorridorRegion;
}

int World::visibility_region(const Eigen::Vector3d& p) const {
  if (auto room = room_containing(p)) return *room;
  return kCorridorRegion;
}

bool World::line_of_sight(const Eigen::Vector3d& a, const Eigen::Vector3d& b) const {
  const Eigen::Vector2d p1 = a.head<2>(), p2 = b.head<2>();
  for (const auto& wall : wall_segments) {
    if (segments_intersect(p1, p2, wall.a, wall.b)) return false;
  }
  return true;
}

bool World::co_visible(const Eigen::Vector3d& a, const Eigen::Vector3d& b) const {
  if ((a - b).head<2>().norm() > config.visibility_radius) return false;
  return line_of_sight(a, b);
}

std::vector<VisiblePoint> World::visible_points(const Eigen::Vector3d& position,
                                                int max_structural) const {
  std::vector<VisiblePoint> out;
  const int region = visibility_region(position);
  const double radius = config.visibility_radius;
  const int surface_count = static_cast<int>(surface_points.size());

  if (region >= 0) {
    for (const auto& obj : objects) {
      if (obj.room != region) continue;
      if ((obj.center - position).head<2>().norm() > radius) continue;
      const PointCloud& pts = object_points[obj.id];
      for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
        out.push_back({surface_count + obj.id * config.points_per_object + k,
                       pts.points[k], obj.room, obj.id});
      }
    }
  }

  std::vector<int> structural;
  for (int idx = 0; idx < surface_count; ++idx) {
    if (surface_points.labels[idx] != region) continue;
    if ((surface_points.points[idx] - position).head<2>().norm() > radius) continue;
    structural.push_back(idx);
  }
  const int stride =
      std::max<int>(1, (static_cast<int>(structural.size()) + max_structural - 1) /
                           max_structural);
  for (std::size_t k = 0; k < structural.size(); k += stride) {
    const int idx = structural[k];
    out.push_back({idx, surface_points.points[idx], surface_points.labels[idx], -1});
  }
  return out;
}

CueSet World::cue_set() const {
  CueSet cues;
  cues.transition_cues.push_back({"doorway", doorway_cue});
  cues.transition_cues.push_back({"corridor", corridor_cue});
  for (const auto& room : rooms) {
    cues.room_cues.push_back(
        {"room_" + std::to_string(room.id), room_embeddings[room.id]});
  }
  return cues;
}

PointCloud World::ground_truth_cloud() const {
  PointCloud out = surface_points;
  for (const auto& obj : objects) {
    for (const auto& p : object_points[obj.id].points) out.add(p, obj.room);
  }
  return out;
}

PointCloud World::ground_truth_room_cloud(int room_id) const {
  PointCloud out;
  for (std::size_t i = 0; i < surface_points.size(); ++i) {
    if (surface_points.labels[i] == room_id) {
      out.add(surface_points.points[i], room_id);
    }
  }
  for (const auto& obj : objects) {
    if (obj.room != room_id) continue;
    for (const auto& p : object_points[obj.id].points) out.add(p, room_id);
  }
  return out;
}

bool World::connected(int room_a, int room_b) const {
  // Every room has a doorway onto the shared corridor spine.
  return room_a != room_b && room_a >= 0 && room_b >= 0 &&
         room_a < static_cast<int>(rooms.size()) &&
         room_b < static_cast<int>(rooms.size());
}

void World::build() {
  std::vector<SurfaceRect> rects;
  wall_segments.clear();
  const double h = config.wall_height;
  const double half_cw = config.corridor_width / 2.0;
  const double half_dw = config.door_width / 2.0;

  const auto add_wall_x = [&](double x0, double x1, double y, int label) {
    // Vertical wall parallel to the spine, from x0 to x1 at height h.
    if (x1 - x0 < 1e-9) return;
    rects.push_back({{x0, y, 0.0}, {x1 - x0, 0.0, 0.0}, {0.0, 0.0, h}, label});
    wall_segments.push_back({{x0, y}, {x1, y}});
  };
  const auto add_wall_y = [&](double y0, double y1, double x, int label) {
    if (y1 - y0 < 1e-9) return;
    rects.push_back({{x, y0, 0.0}, {0.0, y1 - y0, 0.0}, {0.0, 0.0, h}, label});
    wall_segments.push_back({{x, y0}, {x, y1}});
  };

  for (const auto& room : rooms) {
    const double y_corr = room.side > 0 ? room.lo.y() : room.hi.y();
    const double y_far = room.side > 0 ? room.hi.y() : room.lo.y();
    add_wall_x(room.lo.x(), room.hi.x(), y_far, room.id);
    add_wall_y(room.lo.y(), room.hi.y(), room.lo.x(), room.id);
    add_wall_y(room.lo.y(), room.hi.y(), room.hi.x(), room.id);
    // Corridor-side wall with the doorway cut out.
    add_wall_x(room.lo.x(), room.door_x - half_dw, y_corr, room.id);
    add_wall_x(room.door_x + half_dw, room.hi.x(), y_corr, room.id);
    // Floor.
    rects.push_back({{room.lo.x(), room.lo.y(), 0.0},
                     {room.hi.x() - room.lo.x(), 0.0, 0.0},
                     {0.0, room.hi.y() - room.lo.y(), 0.0},
                     room.id});
  }

  // Corridor walls: the spine intervals not backed by a room on that side.
  for (const int side : {+1, -1}) {
    const double y = side * half_cw;
    std::vector<std::pair<double, double>> covered;
    for (const auto& room : rooms) {
      if (room.side == side) covered.emplace_back(room.lo.x(), room.hi.x());
    }
    std::sort(covered.begin(), covered.end());
    double cursor = spine_x0;
    for (const auto& [a, b] : covered) {
      add_wall_x(cursor, a, y, kCorridorRegion);
      cursor = std::max(cursor, b);
    }
    add_wall_x(cursor, spine_x1, y, kCorridorRegion);
  }
  add_wall_y(-half_cw, half_cw, spine_x0, kCorridorRegion);
  add_wall_y(-half_cw, half_cw, spine_x1, kCorridorRegion);
  rects.push_back({{spine_x0, -half_cw, 0.0},
                   {spine_x1 - spine_x0, 0.0, 0.0},
                   {0.0, config.corridor_width, 0.0},
                   kCorridorRegion});

  // Sample every surface at the configured density.
  surface_points = PointCloud{};
  Rng sampler(sample_seed);
  for (std::size_t i = 0; i < rects.size(); ++i) {
    const auto& rect = rects[i];
    const double area = rect.edge_u.norm() * rect.edge_v.norm();
    const auto count =
        std::max<long long>(1, std::llround(area * config.wall_density));
    Rng rng = sampler.fork(i + 1);
    for (long long k = 0; k < count; ++k) {
      const double a = rng.uniform();
      const double b = rng.uniform();
      surface_points.add(rect.origin + a * rect.edge_u + b * rect.edge_v,
                         rect.label);
    }
  }

  // Boxes are sampled in mirrored pairs, so each object's sample centroid is
  // its exact center.
  object_points.assign(objects.size(), PointCloud{});
  for (const auto& obj : objects) {
    Rng rng = sampler.fork(100000 + obj.id);
    PointCloud& cloud = object_points[obj.id];
    const Eigen::Vector3d& e = obj.half_extent;
    const double areas[3] = {e.y() * e.z(), e.x() * e.z(), e.x() * e.y()};
    const double total = areas[0] + areas[1] + areas[2];
    const int pairs = config.points_per_object / 2;
    for (int k = 0; k < pairs; ++k) {
      const double pick = rng.uniform() * total;
      const int axis = pick < areas[0] ? 0 : (pick < areas[0] + areas[1] ? 1 : 2);
      Eigen::Vector3d d;
      for (int a = 0; a < 3; ++a) {
        d[a] = a == axis ? e[a] : rng.uniform(-e[a], e[a]);
      }
      cloud.add(obj.center + d, obj.room);
      cloud.add(obj.center - d, obj.room);
    }
  }
}

World generate_world(const WorldConfig& config, std::uint64_t seed) {
  if (config.n_rooms < 2) {
    throw ConfigError("generate_world: need at least 2 rooms");
  }
  if (config.door_width >= config.room_width_range[0]) {
    throw ConfigError("generate_world: door wider than the narrowest room");
  }
  World world;
  world.config = config;
  world.seed = seed;
  Rng rng(seed ^ 0x726f6f6d736cULL);

  const double half_cw = config.corridor_width / 2.0;
  double cursor = config.room_gap;
  for (int k = 0; k < config.n_rooms; ++k) {
    const double width = rng.uniform(config.room_width_range[0],
                                     config.room_width_range[1]);
    const double depth = rng.uniform(config.room_depth_range[0],
                                     config.room_depth_range[1]);
    RoomBox room;
    room.id = k;
    room.side = (k % 2 == 0) ? +1 : -1;
    const double y0 = room.side > 0 ? half_cw : -half_cw - depth;
    room.lo = {cursor, y0, 0.0};
    room.hi = {cursor + width, y0 + depth, config.wall_height};
    room.door_x = cursor + width / 2.0;
    world.rooms.push_back(room);
    cursor += width + config.room_gap;
  }
  world.spine_x0 = 0.0;
  world.spine_x1 = cursor;
  if (world.spine_x1 - world.spine_x0 > config.max_spine_length) {
    throw ConfigError("generate_world: rooms too large for spine (" +
                      std::to_string(world.spine_x1) + " m > " +
                      std::to_string(config.max_spine_length) + " m)");
  }

  for (int k = 0; k + 1 < config.n_rooms; ++k) {
    world.connectors.push_back({k, k + 1, "corridor"});
  }

  // Room and cue embeddings: random unit vectors, orthonormalized when the
  // dimension allows so cue separability is exact.
  const int n_embeddings = config.n_rooms + 2;
  std::vector<FeatureVector> embeddings;
  for (int i = 0; i < n_embeddings; ++i) {
    embeddings.push_back(rng.unit_vec(config.feature_dim));
  }
  if (n_embeddings <= config.feature_dim) {
    for (int i = 0; i < n_embeddings; ++i) {
      for (int j = 0; j < i; ++j) {
        embeddings[i] -= embeddings[i].dot(embeddings[j]) * embeddings[j];
      }
      const double n = embeddings[i].norm();
      if (n < 1e-6) {
        embeddings[i] = rng.unit_vec(config.feature_dim);
        --i;
        continue;
      }
      embeddings[i] /= n;
    }
  }
  world.doorway_cue = embeddings[0];
  world.corridor_cue = embeddings[1];
  world.room_embeddings.assign(embeddings.begin() + 2, embeddings.end());

  // Boxes on the floor, kept away from walls; overlapping placements are
  // re-drawn a few times.
  int next_object_id = 0;
  int label_cursor = 0;
  constexpr int n_labels = sizeof(kObjectLabels) / sizeof(kObjectLabels[0]);
  for (const auto& room : world.rooms) {
    const int count = config.objects_per_room[0] +
                      static_cast<int>(rng.uniform_index(
                          config.objects_per_room[1] - config.objects_per_room[0] + 1));
    for (int k = 0; k < count; ++k) {
      SimObject obj;
      obj.id = next_object_id++;
      obj.room = room.id;
      for (int attempt = 0; attempt < 20; ++attempt) {
        Eigen::Vector3d he;
        he.x() = rng.uniform(config.object_extent_range[0],
                             config.object_extent_range[1]) / 2.0;
        he.y() = rng.uniform(config.object_extent_range[0],
                             config.object_extent_range[1]) / 2.0;
        he.z() = rng.uniform(config.object_extent_range[0],
                             config.object_extent_range[1]) / 2.0;
        const double margin = 0.3;
        const double x = rng.uniform(room.lo.x() + he.x() + margin,
                                     room.hi.x() - he.x() - margin);
        const double y = rng.uniform(room.lo.y() + he.y() + margin,
                                     room.hi.y() - he.y() - margin);
        obj.half_extent = he;
        obj.center = {x, y, he.z()};
        bool overlaps = false;
        for (const auto& other : world.objects) {
          if (other.room != room.id) continue;
          if ((other.center - obj.center).head<2>().cwiseAbs().x() <
                  other.half_extent.x() + he.x() &&
              (other.center - obj.center).head<2>().cwiseAbs().y() <
                  other.half_extent.y() + he.y()) {
            overlaps = true;
            break;
          }
        }
        if (!overlaps) break;
      }
      obj.feature = rng.unit_vec(config.feature_dim);
      obj.label = kObjectLabels[label_cursor++ % n_labels];
      world.objects.push_back(std::move(obj));
    }
  }

  world.sample_seed = rng.next_u64();
  world.build();
  return world;
}

// --- world serialization ----------------------------------------------------

namespace {

json vec_to_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

Eigen::Vector3d vec_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ParseError(path + ": expected [x,y,z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json feature_to_json(const FeatureVector& f) {
  json arr = json::array();
  for (int i = 0; i < f.size(); ++i) arr.push_back(f[i]);
  return arr;
}

FeatureVector feature_from_json(const json& arr) {
  FeatureVector f(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    f[static_cast<int>(i)] = arr[i].get<double>();
  }
  return f;
}

}  // namespace

void write_world(const std::filesystem::path& path, const World& world) {
  json doc;
  doc["version"] = 1;
  json cfg;
  cfg["n_rooms"] = world.config.n_rooms;
  cfg["room_width_range"] = world.config.room_width_range;
  cfg["room_depth_range"] = world.config.room_depth_range;
  cfg["wall_height"] = world.config.wall_height;
  cfg["corridor_width"] = world.config.corridor_width;
  cfg["door_width"] = world.config.door_width;
  cfg["room_gap"] = world.config.room_gap;
  cfg["wall_density"] = world.config.wall_density;
  cfg["feature_dim"] = world.config.feature_dim;
  cfg["objects_per_room"] = world.config.objects_per_room;
  cfg["object_extent_range"] = world.config.object_extent_range;
  cfg["points_per_object"] = world.config.points_per_object;
  cfg["visibility_radius"] = world.config.visibility_radius;
  cfg["max_spine_length"] = world.config.max_spine_length;
  doc["config"] = std::move(cfg);
  doc["seed"] = world.seed;
  doc["sample_seed"] = world.sample_seed;
  doc["spine"] = {world.spine_x0, world.spine_x1};

  json rooms = json::array();
  for (const auto& r : world.rooms) {
    rooms.push_back({{"id", r.id},
                     {"lo", vec_to_json(r.lo)},
                     {"hi", vec_to_json(r.hi)},
                     {"door_x", r.door_x},
                     {"side", r.side}});
  }
  doc["rooms"] = std::move(rooms);

  json connectors = json::array();
  for (const auto& c : world.connectors) {
    connectors.push_back({{"room_a", c.room_a}, {"room_b", c.room_b}, {"kind", c.kind}});
  }
  doc["connectors"] = std::move(connectors);

  json objects = json::array();
  for (const auto& o : world.objects) {
    objects.push_back({{"id", o.id},
                       {"room", o.room},
                       {"center", vec_to_json(o.center)},
                       {"half_extent", vec_to_json(o.half_extent)},
                       {"label", o.label},
                       {"feature", feature_to_json(o.feature)}});
  }
  doc["objects"] = std::move(objects);

  json embeddings = json::array();
  for (const auto& e : world.room_embeddings) embeddings.push_back(feature_to_json(e));
  doc["room_embeddings"] = std::move(embeddings);
  doc["doorway_cue"] = feature_to_json(world.doorway_cue);
  doc["corridor_cue"] = feature_to_json(world.corridor_cue);

  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

World read_world(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  World world;
  try {
    const json& cfg = doc.at("config");
    world.config.n_rooms = cfg.at("n_rooms").get<int>();
    world.config.room_width_range = cfg.at("room_width_range").get<std::array<double, 2>>();
    world.config.room_depth_range = cfg.at("room_depth_range").get<std::array<double, 2>>();
    world.config.wall_height = cfg.at("wall_height").get<double>();
    world.config.corridor_width = cfg.at("corridor_width").get<double>();
    world.config.door_width = cfg.at("door_width").get<double>();
    world.config.room_gap = cfg.at("room_gap").get<double>();
    world.config.wall_density = cfg.at("wall_density").get<double>();
    world.config.feature_dim = cfg.at("feature_dim").get<int>();
    world.config.objects_per_room = cfg.at("objects_per_room").get<std::array<int, 2>>();
    world.config.object_extent_range =
        cfg.at("object_extent_range").get<std::array<double, 2>>();
    world.config.points_per_object = cfg.at("points_per_object").get<int>();
    world.config.visibility_radius = cfg.at("visibility_radius").get<double>();
    world.config.max_spine_length = cfg.at("max_spine_length").get<double>();
    world.seed = doc.at("seed").get<std::uint64_t>();
    world.sample_seed = doc.at("sample_seed").get<std::uint64_t>();
    world.spine_x0 = doc.at("spine")[0].get<double>();
    world.spine_x1 = doc.at("spine")[1].get<double>();
    for (const auto& r : doc.at("rooms")) {
      RoomBox room;
      room.id = r.at("id").get<int>();
      room.lo = vec_from_json(r.at("lo"), "rooms.lo");
      room.hi = vec_from_json(r.at("hi"), "rooms.hi");
      room.door_x = r.at("door_x").get<double>();
      room.side = r.at("side").get<int>();
      world.rooms.push_back(room);
    }
    for (const auto& c : doc.at("connectors")) {
      world.connectors.push_back({c.at("room_a").get<int>(),
                                  c.at("room_b").get<int>(),
                                  c.at("kind").get<std::string>()});
    }
    for (const auto& o : doc.at("objects")) {
      SimObject obj;
      obj.id = o.at("id").get<int>();
      obj.room = o.at("room").get<int>();
      obj.center = vec_from_json(o.at("center"), "objects.center");
      obj.half_extent = vec_from_json(o.at("half_extent"), "objects.half_extent");
      obj.label = o.at("label").get<std::string>();
      obj.feature = feature_from_json(o.at("feature"));
      world.objects.push_back(std::move(obj));
    }
    for (const auto& e : doc.at("room_embeddings")) {
      world.room_embeddings.push_back(feature_from_json(e));
    }
    world.doorway_cue = feature_from_json(doc.at("doorway_cue"));
    world.corridor_cue = feature_from_json(doc.at("corridor_cue"));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  world.build();
  return world;
}

// --- sequence generation ------------------------------------------------------

namespace {

// Piecewise-linear path with arc-length parameterization.
struct Polyline {
  std::vector<Eigen::Vector2d> pts;
  std::vector<double> cumulative;

  void finalize() {
    cumulative.assign(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      cumulative[i] = cumulative[i - 1] + (pts[i] - pts[i - 1]).norm();
    }
  }
  double length() const { return cumulative.empty() ? 0.0 : cumulative.back(); }

  // Position and unit tangent at arc length s.
  std::pair<Eigen::Vector2d, Eigen::Vector2d> at(double s) const {
    s = std::clamp(s, 0.0, length());
    std::size_t i = 1;
    while (i + 1 < pts.size() && cumulative[i] < s) ++i;
    const double seg = cumulative[i] - cumulative[i - 1];
    const double t = seg > 1e-12 ? (s - cumulative[i - 1]) / seg : 0.0;
    Eigen::Vector2d dir = pts[i] - pts[i - 1];
    const double n = dir.norm();
    dir = n > 1e-12 ? Eigen::Vector2d(dir / n) : Eigen::Vector2d(1, 0);
    return {pts[i - 1] + t * (pts[i] - pts[i - 1]), dir};
  }
};

Eigen::Vector2d door_inner(const World& world, const RoomBox& room) {
  const double y_wall = room.side > 0 ? room.lo.y() : room.hi.y();
  return {room.door_x, y_wall + room.side * kDoorApproach};
}

Eigen::Vector2d door_corridor(const World& world, const RoomBox& room) {
  const double y_wall = room.side > 0 ? room.lo.y() : room.hi.y();
  return {room.door_x, y_wall - room.side * kDoorApproach};
}

// Loop inside the room starting and ending near the door.
std::vector<Eigen::Vector2d> room_loop(const RoomBox& room) {
  const Eigen::Vector3d c3 = room.center();
  const Eigen::Vector2d c = c3.head<2>();
  const double rx = 0.35 * (room.hi.x() - room.lo.x());
  const double ry = 0.35 * (room.hi.y() - room.lo.y());
  const Eigen::Vector2d towards_door =
      Eigen::Vector2d(room.door_x, room.side > 0 ? room.lo.y() : room.hi.y()) - c;
  const double theta0 = std::atan2(towards_door.y(), towards_door.x());
  std::vector<Eigen::Vector2d> pts;
  for (int k = 0; k <= kEllipseSegments; ++k) {
    const double theta = theta0 + 2.0 * M_PI * k / kEllipseSegments;
    pts.emplace_back(c.x() + rx * std::cos(theta), c.y() + ry * std::sin(theta));
  }
  return pts;
}

Sim3 camera_pose(const Eigen::Vector2d& position, const Eigen::Vector2d& tangent,
                 double height, int frame_index) {
  const double yaw = std::atan2(tangent.y(), tangent.x());
  // Small smooth pitch sway so rotations are not pure yaw.
  const double pitch = 0.12 * std::sin(0.37 * frame_index);
  const Eigen::Quaterniond q =
      Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ())) *
      Eigen::Quaterniond(Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()));
  return Sim3(q, {position.x(), position.y(), height}, 1.0);
}

}  // namespace

SimulatedSequence generate_sequence(const World& world, const SequenceSpec& spec) {
  if (spec.visit_order.empty()) {
    throw ConfigError("generate_sequence: empty visit order");
  }
  for (std::size_t i = 0; i < spec.visit_order.size(); ++i) {
    const int room = spec.visit_order[i];
    if (room < 0 || room >= static_cast<int>(world.rooms.size())) {
      throw ConfigError("generate_sequence: unknown room " + std::to_string(room));
    }
    if (i > 0 && !world.connected(spec.visit_order[i - 1], room)) {
      throw ConfigError("generate_sequence: rooms " +
                        std::to_string(spec.visit_order[i - 1]) + " and " +
                        std::to_string(room) + " are not connected");
    }
  }
  if (spec.frames_per_room < 2 || spec.frames_per_connector < 1) {
    throw ConfigError("generate_sequence: too few frames per leg");
  }

  Rng rng(spec.rng_seed ^ 0x73657175656eULL);
  SimulatedSequence seq;
  seq.connector_traversals = static_cast<int>(spec.visit_order.size()) - 1;

  struct Leg {
    Polyline path;
    int frames = 0;
    bool in_room = false;
    int visit_index = -1;
  };
  std::vector<Leg> legs;

  for (std::size_t v = 0; v < spec.visit_order.size(); ++v) {
    const RoomBox& room = world.rooms[spec.visit_order[v]];
    Leg leg;
    leg.in_room = true;
    leg.visit_index = static_cast<int>(v);
    if (v > 0) leg.path.pts.push_back(door_inner(world, room));
    const auto loop = room_loop(room);
    leg.path.pts.insert(leg.path.pts.end(), loop.begin(), loop.end());
    leg.path.finalize();
    leg.frames = spec.frames_per_room;
    legs.push_back(std::move(leg));

    if (v + 1 < spec.visit_order.size()) {
      const RoomBox& next = world.rooms[spec.visit_order[v + 1]];
      Leg conn;
      conn.in_room = false;
      conn.path.pts.push_back(loop.back());
      conn.path.pts.push_back(door_inner(world, room));
      conn.path.pts.push_back(door_corridor(world, room));
      conn.path.pts.push_back({room.door_x, 0.0});
      conn.path.pts.push_back({next.door_x, 0.0});
      conn.path.pts.push_back(door_corridor(world, next));
      conn.path.pts.push_back(door_inner(world, next));
      conn.path.finalize();
      conn.frames = spec.frames_per_connector;
      legs.push_back(std::move(conn));
    }
  }

  // Frames: positions sampled uniformly in arc length along each leg.
  int frame_id = 0;
  std::vector<std::vector<int>> visit_frames(spec.visit_order.size());
  for (const auto& leg : legs) {
    for (int k = 0; k < leg.frames; ++k) {
      const double s = leg.path.length() * (k + 0.5) / leg.frames;
      const auto [pos2, tangent] = leg.path.at(s);
      const Sim3 pose = camera_pose(pos2, tangent, spec.camera_height, frame_id);
      const Eigen::Vector3d pos = pose.translation();

      FrameRecord frame;
      frame.id = frame_id;
      frame.timestamp = frame_id / spec.fps;
      frame.gt_pose = pose;
      frame.gt_room = world.room_containing(pos);

      const int region = world.feature_region(pos);
      const FeatureVector* base = nullptr;
      if (region == World::kDoorwayRegion) {
        base = &world.doorway_cue;
      } else if (region == World::kCorridorRegion) {
        base = &world.corridor_cue;
      } else {
        base = &world.room_embeddings[region];
      }
      frame.feature = noisy_unit_feature(*base, spec.feature_noise_sigma, rng);

      if (leg.in_room) visit_frames[leg.visit_index].push_back(frame_id);
      seq.gt_trajectory.append(frame.timestamp, pose);
      seq.frames.push_back(std::move(frame));
      ++frame_id;
    }
  }

  // Ground-truth tracklets: one per (object, visit) with strided multi-view
  // observations and pixel masks consistent with the per-frame pointmaps.
  seq.tracklets.grid_width = world.grid_width();
  seq.tracklets.grid_height = world.grid_height();
  int tracklet_id = 0;
  for (std::size_t v = 0; v < spec.visit_order.size(); ++v) {
    const int room_id = spec.visit_order[v];
    for (const auto& obj : world.objects) {
      if (obj.room != room_id) continue;
      MaskTracklet tracklet;
      tracklet.id = tracklet_id;
      tracklet.seed_label = obj.label;
      for (std::size_t k = 0; k < visit_frames[v].size();
           k += std::max(1, spec.tracklet_stride)) {
        const int fid = visit_frames[v][k];
        const Eigen::Vector3d pos = seq.frames[fid].gt_pose->translation();
        if ((obj.center - pos).head<2>().norm() > world.config.visibility_radius) {
          continue;
        }
        const auto visible = world.visible_points(pos);
        MaskObservation obs;
        obs.frame_id = fid;
        for (std::size_t px = 0; px < visible.size(); ++px) {
          if (visible[px].object_id == obj.id) obs.mask.push_back(static_cast<int>(px));
        }
        if (obs.mask.empty()) continue;
        obs.feature = noisy_unit_feature(obj.feature, spec.feature_noise_sigma, rng);
        tracklet.observations.push_back(std::move(obs));
      }
      if (!tracklet.observations.empty()) {
        seq.tracklets.tracklets.push_back(std::move(tracklet));
        ++tracklet_id;
      }
    }
  }
  return seq;
}

}  // namespace roomsg
