#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "roomsg/errors.hpp"

namespace roomsg {

// Static 3D k-d tree with median splits, for nearest-neighbor queries on
// point clouds. Built once over a snapshot of the points.
class KdTree {
 public:
  explicit KdTree(const std::vector<Eigen::Vector3d>& points) : points_(points) {
    if (points_.empty()) throw InvalidInputError("KdTree: empty point set");
    index_.resize(points_.size());
    std::iota(index_.begin(), index_.end(), 0);
    nodes_.reserve(2 * points_.size());
    root_ = build(0, static_cast<int>(points_.size()));
  }

  struct Result {
    int index = -1;
    double squared_distance = std::numeric_limits<double>::infinity();
  };

  Result nearest(const Eigen::Vector3d& query) const {
    Result best;
    search(root_, query, best);
    return best;
  }

  double nearest_distance(const Eigen::Vector3d& query) const {
    return std::sqrt(nearest(query).squared_distance);
  }

 private:
  struct Node {
    int axis = -1;        // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into index_
  };

  static constexpr int kLeafSize = 16;

  int build(int begin, int end) {
    Node node;
    if (end - begin <= kLeafSize) {
      node.begin = begin;
      node.end = end;
      nodes_.push_back(node);
      return static_cast<int>(nodes_.size()) - 1;
    }
    Eigen::Vector3d lo = points_[index_[begin]], hi = lo;
    for (int i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(points_[index_[i]]);
      hi = hi.cwiseMax(points_[index_[i]]);
    }
    int axis;
    (hi - lo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(index_.begin() + begin, index_.begin() + mid,
                     index_.begin() + end, [&](int a, int b) {
                       return points_[a][axis] < points_[b][axis];
                     });
    node.axis = axis;
    node.split = points_[index_[mid]][axis];
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
  }

  void search(int node_id, const Eigen::Vector3d& q, Result& best) const {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const double d2 = (points_[index_[i]] - q).squaredNorm();
        if (d2 < best.squared_distance) {
          best.squared_distance = d2;
          best.index = index_[i];
        }
      }
      return;
    }
    const double delta = q[node.axis] - node.split;
    const int near = delta < 0 ? node.left : node.right;
    const int far = delta < 0 ? node.right : node.left;
    search(near, q, best);
    if (delta * delta < best.squared_distance) search(far, q, best);
  }

  std::vector<Eigen::Vector3d> points_;
  std::vector<int> index_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace roomsg
