#pragma once

#include "roomsg/point_cloud.hpp"
#include "roomsg/trajectory.hpp"

namespace roomsg {

struct ChamferConfig {
  // Cap on per-point nearest-neighbor distances; <= 0 disables truncation.
  double truncation = 0.0;
};

// Symmetric mean nearest-neighbor distance between two clouds, in meters:
// 0.5 * (mean_pred NN-dist to gt + mean_gt NN-dist to pred).
// The prediction must already be expressed in the ground-truth frame.
double chamfer_distance(const PointCloud& pred, const PointCloud& gt,
                        const ChamferConfig& config = {});

enum class AteAlignment { kNone, kSe3, kSim3 };

struct AteConfig {
  AteAlignment alignment = AteAlignment::kSim3;
  double max_dt = 0.02;  // timestamp association window, seconds
};

// RMSE of translation residuals between est and gt after timestamp
// association and the requested alignment of est onto gt. Throws
// InsufficientOverlapError with fewer than 3 associated pairs.
double ate_rmse(const Trajectory& est, const Trajectory& gt,
                const AteConfig& config = {});

}  // namespace roomsg
