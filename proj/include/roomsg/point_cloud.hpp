#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "roomsg/errors.hpp"
#include "roomsg/sim3.hpp"

namespace roomsg {

// A bag of 3D points in meters, optionally carrying one integer label per
// point (room or object id). Labels are either empty or match points in size.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<int> labels;

  bool has_labels() const { return !labels.empty(); }
  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  void add(const Eigen::Vector3d& p) { points.push_back(p); }
  void add(const Eigen::Vector3d& p, int label) {
    points.push_back(p);
    labels.push_back(label);
  }

  void append(const PointCloud& other) {
    if (has_labels() != other.has_labels() && !empty() && !other.empty()) {
      throw InvalidInputError("PointCloud::append: label presence mismatch");
    }
    points.insert(points.end(), other.points.begin(), other.points.end());
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
  }

  void check_finite() const {
    for (const auto& p : points) {
      if (!p.allFinite()) {
        throw InvalidInputError("PointCloud: non-finite coordinate");
      }
    }
  }
};

// Applies x -> scale * R * x + t to every point; labels are preserved.
inline PointCloud transform_points(const Sim3& T, const PointCloud& cloud) {
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) out.points.push_back(T * p);
  out.labels = cloud.labels;
  return out;
}

// Keeps one point (the centroid of members) per occupied voxel.
// Deterministic: voxels are emitted in first-seen order.
inline PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  if (voxel_size <= 0) throw InvalidInputError("voxel_downsample: size must be > 0");
  struct Cell {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int count = 0;
    int label = -1;
  };
  std::unordered_map<std::uint64_t, Cell> cells;
  std::vector<std::uint64_t> order;
  cells.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Eigen::Vector3d& p = cloud.points[i];
    const auto ix = static_cast<std::int64_t>(std::floor(p.x() / voxel_size));
    const auto iy = static_cast<std::int64_t>(std::floor(p.y() / voxel_size));
    const auto iz = static_cast<std::int64_t>(std::floor(p.z() / voxel_size));
    const std::uint64_t key = (static_cast<std::uint64_t>(ix & 0x1fffff) << 42) |
                              (static_cast<std::uint64_t>(iy & 0x1fffff) << 21) |
                              static_cast<std::uint64_t>(iz & 0x1fffff);
    auto [it, inserted] = cells.try_emplace(key);
    if (inserted) {
      order.push_back(key);
      if (cloud.has_labels()) it->second.label = cloud.labels[i];
    }
    it->second.sum += p;
    it->second.count += 1;
  }
  PointCloud out;
  out.points.reserve(order.size());
  for (const auto key : order) {
    const Cell& c = cells.at(key);
    out.points.push_back(c.sum / c.count);
    if (cloud.has_labels()) out.labels.push_back(c.label);
  }
  return out;
}

inline Eigen::Vector3d centroid(const PointCloud& cloud) {
  if (cloud.empty()) throw InvalidInputError("centroid: empty cloud");
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& p : cloud.points) c += p;
  return c / static_cast<double>(cloud.size());
}

}  // namespace roomsg
