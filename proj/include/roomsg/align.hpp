#pragma once

#include <vector>

#include <Eigen/Core>

#include "roomsg/point_cloud.hpp"
#include "roomsg/sim3.hpp"
#include "roomsg/trajectory.hpp"

namespace roomsg {

// Closed-form least-squares similarity alignment (Umeyama): returns T
// minimizing sum_i ||dst_i - T(src_i)||^2 over index-matched point sets.
// With with_scale = false the scale is forced to 1 (SE(3) alignment).
// Throws DegenerateInputError on collinear or coincident input.
Sim3 umeyama_align(const std::vector<Eigen::Vector3d>& src,
                   const std::vector<Eigen::Vector3d>& dst, bool with_scale);

Sim3 umeyama_align(const PointCloud& src, const PointCloud& dst, bool with_scale);

// Alignment of trajectory translations after timestamp association.
Sim3 umeyama_align(const Trajectory& src, const Trajectory& dst, bool with_scale,
                   double max_dt = 0.02);

struct IcpConfig {
  int max_iterations = 20;
  double translation_tol = 1e-6;  // stop when the update is this small
  int max_correspondences = 2000;
  bool with_scale = true;
};

// Point-to-point ICP refining an initial similarity transform of src onto
// dst. Correspondences are nearest neighbors of (subsampled) transformed src
// points; each iteration re-solves Umeyama on the matched pairs.
Sim3 icp_align(const PointCloud& src, const PointCloud& dst, const Sim3& initial,
               const IcpConfig& config = {});

}  // namespace roomsg
