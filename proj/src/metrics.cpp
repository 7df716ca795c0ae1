#include "roomsg/metrics.hpp"

#include "roomsg/align.hpp"
#include "roomsg/kdtree.hpp"

namespace roomsg {

namespace {

double mean_nn_distance(const PointCloud& from, const KdTree& to_tree,
                        double truncation) {
  double sum = 0.0;
  for (const auto& p : from.points) {
    double d = to_tree.nearest_distance(p);
    if (truncation > 0.0 && d > truncation) d = truncation;
    sum += d;
  }
  return sum / static_cast<double>(from.size());
}

}  // namespace

double chamfer_distance(const PointCloud& pred, const PointCloud& gt,
                        const ChamferConfig& config) {
  if (pred.empty() || gt.empty()) {
    throw InvalidInputError("chamfer_distance: empty point cloud");
  }
  const KdTree gt_tree(gt.points);
  const KdTree pred_tree(pred.points);
  return 0.5 * (mean_nn_distance(pred, gt_tree, config.truncation) +
                mean_nn_distance(gt, pred_tree, config.truncation));
}

double ate_rmse(const Trajectory& est, const Trajectory& gt,
                const AteConfig& config) {
  const auto matches = associate_by_time(est, gt, config.max_dt);
  if (matches.size() < 3) {
    throw InsufficientOverlapError(
        "ate_rmse: only " + std::to_string(matches.size()) +
        " associated pose pairs (need 3)");
  }
  std::vector<Eigen::Vector3d> est_t, gt_t;
  est_t.reserve(matches.size());
  gt_t.reserve(matches.size());
  for (const auto& [i, j] : matches) {
    est_t.push_back(est.samples[i].pose.translation());
    gt_t.push_back(gt.samples[j].pose.translation());
  }

  Sim3 T;  // identity when no alignment requested
  if (config.alignment != AteAlignment::kNone) {
    T = umeyama_align(est_t, gt_t, config.alignment == AteAlignment::kSim3);
  }
  double sq_sum = 0.0;
  for (std::size_t k = 0; k < est_t.size(); ++k) {
    sq_sum += (gt_t[k] - T * est_t[k]).squaredNorm();
  }
  return std::sqrt(sq_sum / static_cast<double>(est_t.size()));
}

}  // namespace roomsg
