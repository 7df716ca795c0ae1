#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "roomsg/scene_graph.hpp"

namespace roomsg {

struct PgoConfig {
  int max_iterations = 100;
  double lambda_init = 1e-4;
  double cost_tolerance = 1e-10;  // relative decrease of accepted cost
  double step_tolerance = 1e-10;  // inf-norm of the accepted update
  std::optional<int> anchor;      // fixed node; default lowest id per component
  double huber_delta = 0.0;       // robust kernel on residual norm, 0 = off
  int dense_node_limit = 200;     // switch to sparse solving above this
};

struct OptReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  bool converged = false;
  std::vector<double> lambda_trace;
};

// Residual of one factor: log(measurement^-1 * T_i^-1 * T_j). Zero exactly
// when T_i^-1 T_j equals the measurement.
Sim3Tangent pgo_residual(const PoseFactor& factor, const Sim3& pose_i,
                         const Sim3& pose_j);

// Analytic residual Jacobians for right-multiplicative perturbations of
// T_i and T_j. Exact (series-evaluated inverse right Jacobian), so they
// agree with finite differences at any residual magnitude.
void pgo_residual_jacobians(const PoseFactor& factor, const Sim3& pose_i,
                            const Sim3& pose_j, Matrix7d& jac_i, Matrix7d& jac_j);

// Central finite-difference check of the analytic Jacobians; returns the
// maximum absolute deviation over all 14 tangent coordinates.
double numeric_jacobian_check(const PoseFactor& factor, const Sim3& pose_i,
                              const Sim3& pose_j, double step = 1e-6);

// Levenberg-Marquardt optimization of the room layer in place. One anchor
// per factor-connected component is held fixed to pin the gauge;
// disconnected components are optimized independently. Object poses live in
// room frames and are untouched. Throws UnconstrainedError when the graph
// has several rooms but no factor at all.
OptReport optimize(RoomPoseGraphView& view, const PgoConfig& config = {});

// --- g2o-style text exchange ------------------------------------------------

struct G2oDocument {
  std::map<int, Sim3> vertices;
  std::vector<PoseFactor> edges;
};

// `VERTEX_SIM3:QUAT id tx ty tz qx qy qz qw s` and
// `EDGE_SIM3:QUAT i j tx ty tz qx qy qz qw s <28 upper-triangular info>`.
void write_g2o(const std::filesystem::path& path, const G2oDocument& doc);
void write_g2o(const std::filesystem::path& path, const RoomPoseGraphView& view);
G2oDocument read_g2o(const std::filesystem::path& path);

}  // namespace roomsg
