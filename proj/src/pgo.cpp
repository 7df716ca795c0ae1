#include "roomsg/pgo.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

namespace roomsg {

Sim3Tangent pgo_residual(const PoseFactor& factor, const Sim3& pose_i,
                         const Sim3& pose_j) {
  return sim3_log(factor.measurement.inverse() * pose_i.inverse() * pose_j);
}

void pgo_residual_jacobians(const PoseFactor& factor, const Sim3& pose_i,
                            const Sim3& pose_j, Matrix7d& jac_i, Matrix7d& jac_j) {
  const Sim3Tangent r = pgo_residual(factor, pose_i, pose_j);
  jac_j = sim3_inv_right_jacobian(r);
  jac_i = -jac_j * (pose_j.inverse() * pose_i).adjoint();
}

double numeric_jacobian_check(const PoseFactor& factor, const Sim3& pose_i,
                              const Sim3& pose_j, double step) {
  Matrix7d jac_i, jac_j;
  pgo_residual_jacobians(factor, pose_i, pose_j, jac_i, jac_j);
  double max_dev = 0.0;
  for (int side = 0; side < 2; ++side) {
    for (int k = 0; k < 7; ++k) {
      Sim3Tangent delta = Sim3Tangent::Zero();
      delta[k] = step;
      Sim3Tangent r_plus, r_minus;
      if (side == 0) {
        r_plus = pgo_residual(factor, pose_i * sim3_exp(delta), pose_j);
        r_minus = pgo_residual(factor, pose_i * sim3_exp(-delta), pose_j);
      } else {
        r_plus = pgo_residual(factor, pose_i, pose_j * sim3_exp(delta));
        r_minus = pgo_residual(factor, pose_i, pose_j * sim3_exp(-delta));
      }
      const Sim3Tangent numeric = (r_plus - r_minus) / (2.0 * step);
      const Sim3Tangent analytic =
          (side == 0 ? jac_i : jac_j).col(k);
      max_dev = std::max(max_dev, (numeric - analytic).cwiseAbs().maxCoeff());
    }
  }
  return max_dev;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

double factor_cost(const PoseFactor& factor, const Sim3& pose_i, const Sim3& pose_j,
                   double huber_delta) {
  const Sim3Tangent r = pgo_residual(factor, pose_i, pose_j);
  const double e2 = r.dot(factor.information * r);
  if (huber_delta <= 0.0) return e2;
  const double e = std::sqrt(e2);
  return e <= huber_delta ? e2 : huber_delta * (2.0 * e - huber_delta);
}

}  // namespace

OptReport optimize(RoomPoseGraphView& view, const PgoConfig& config) {
  const auto& room_ids = view.room_ids();
  const auto& factors = view.factors();
  OptReport report;
  if (room_ids.empty()) {
    report.converged = true;
    return report;
  }
  if (factors.empty()) {
    if (room_ids.size() > 1) {
      throw UnconstrainedError(
          "optimize: " + std::to_string(room_ids.size()) +
          " rooms but no factor constrains any of them");
    }
    report.converged = true;
    return report;
  }

  // Connected components over factors; one anchor per component.
  std::map<int, int> slot_of_room;  // room id -> dense slot
  for (std::size_t s = 0; s < room_ids.size(); ++s) {
    slot_of_room[room_ids[s]] = static_cast<int>(s);
  }
  UnionFind uf(static_cast<int>(room_ids.size()));
  for (const auto& f : factors) {
    uf.unite(slot_of_room.at(f.room_i), slot_of_room.at(f.room_j));
  }
  std::map<int, int> component_anchor;  // component root -> anchor room id
  for (const int id : room_ids) {
    const int root = uf.find(slot_of_room.at(id));
    const auto it = component_anchor.find(root);
    if (it == component_anchor.end() || id < it->second) {
      component_anchor[root] = id;
    }
  }
  if (config.anchor) {
    if (!slot_of_room.count(*config.anchor)) {
      throw LookupError("optimize: anchor room " + std::to_string(*config.anchor) +
                        " is not in the graph");
    }
    component_anchor[uf.find(slot_of_room.at(*config.anchor))] = *config.anchor;
  }

  // Free variables: non-anchor rooms of components touched by factors.
  std::set<int> constrained_roots;
  for (const auto& f : factors) {
    constrained_roots.insert(uf.find(slot_of_room.at(f.room_i)));
  }
  std::map<int, int> var_of_room;  // room id -> variable index
  std::vector<int> room_of_var;
  for (const int id : room_ids) {
    const int root = uf.find(slot_of_room.at(id));
    if (!constrained_roots.count(root)) continue;
    if (component_anchor.at(root) == id) continue;
    var_of_room[id] = static_cast<int>(room_of_var.size());
    room_of_var.push_back(id);
  }
  const int n_vars = static_cast<int>(room_of_var.size());
  if (n_vars == 0) {
    report.converged = true;
    return report;
  }
  const int dim = 7 * n_vars;

  std::map<int, Sim3> poses;
  for (const int id : room_ids) poses[id] = view.pose(id);

  const auto total_cost = [&](const std::map<int, Sim3>& p) {
    double cost = 0.0;
    for (const auto& f : factors) {
      cost += factor_cost(f, p.at(f.room_i), p.at(f.room_j), config.huber_delta);
    }
    return cost;
  };

  double cost = total_cost(poses);
  report.initial_cost = cost;
  double lambda = config.lambda_init;
  const bool dense = n_vars <= config.dense_node_limit;

  bool converged = false;
  int iteration = 0;
  for (; iteration < config.max_iterations && !converged; ++iteration) {
    // Assemble the normal equations at the current linearization point.
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd H_dense;
    std::vector<Eigen::Triplet<double>> triplets;
    if (dense) {
      H_dense = Eigen::MatrixXd::Zero(dim, dim);
    }
    const auto add_block = [&](int row, int col, const Matrix7d& block) {
      if (dense) {
        H_dense.block<7, 7>(row, col) += block;
      } else {
        for (int r = 0; r < 7; ++r) {
          for (int c = 0; c < 7; ++c) {
            triplets.emplace_back(row + r, col + c, block(r, c));
          }
        }
      }
    };

    for (const auto& f : factors) {
      const Sim3& pose_i = poses.at(f.room_i);
      const Sim3& pose_j = poses.at(f.room_j);
      const Sim3Tangent r = pgo_residual(f, pose_i, pose_j);
      Matrix7d jac_i, jac_j;
      pgo_residual_jacobians(f, pose_i, pose_j, jac_i, jac_j);

      Matrix7d W = f.information;
      if (config.huber_delta > 0.0) {
        const double e = std::sqrt(std::max(r.dot(W * r), 1e-300));
        if (e > config.huber_delta) W *= config.huber_delta / e;
      }

      const auto it_i = var_of_room.find(f.room_i);
      const auto it_j = var_of_room.find(f.room_j);
      if (it_i != var_of_room.end()) {
        const int a = 7 * it_i->second;
        add_block(a, a, jac_i.transpose() * W * jac_i);
        g.segment<7>(a) -= jac_i.transpose() * W * r;
      }
      if (it_j != var_of_room.end()) {
        const int b = 7 * it_j->second;
        add_block(b, b, jac_j.transpose() * W * jac_j);
        g.segment<7>(b) -= jac_j.transpose() * W * r;
      }
      if (it_i != var_of_room.end() && it_j != var_of_room.end()) {
        const int a = 7 * it_i->second;
        const int b = 7 * it_j->second;
        const Matrix7d off = jac_i.transpose() * W * jac_j;
        add_block(a, b, off);
        add_block(b, a, off.transpose());
      }
    }

    Eigen::SparseMatrix<double> H_sparse;
    if (!dense) {
      H_sparse.resize(dim, dim);
      H_sparse.setFromTriplets(triplets.begin(), triplets.end());
    }

    // Inner damping loop: retry with larger lambda until a step is accepted.
    bool accepted = false;
    while (!accepted) {
      report.lambda_trace.push_back(lambda);
      Eigen::VectorXd delta;
      if (dense) {
        Eigen::MatrixXd H_damped = H_dense;
        for (int d = 0; d < dim; ++d) {
          H_damped(d, d) += lambda * std::max(H_dense(d, d), 1e-12);
        }
        delta = H_damped.ldlt().solve(g);
      } else {
        Eigen::SparseMatrix<double> H_damped = H_sparse;
        for (int d = 0; d < dim; ++d) {
          H_damped.coeffRef(d, d) += lambda * std::max(H_sparse.coeff(d, d), 1e-12);
        }
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(H_damped);
        if (solver.info() != Eigen::Success) {
          lambda *= 10.0;
          if (lambda > 1e12) break;
          continue;
        }
        delta = solver.solve(g);
      }

      std::map<int, Sim3> candidate = poses;
      for (int v = 0; v < n_vars; ++v) {
        const int id = room_of_var[v];
        candidate[id] = candidate[id] * sim3_exp(delta.segment<7>(7 * v));
      }
      const double candidate_cost = total_cost(candidate);
      if (candidate_cost < cost) {
        accepted = true;
        const double decrease = cost - candidate_cost;
        poses = std::move(candidate);
        cost = candidate_cost;
        lambda = std::max(lambda / 3.0, 1e-12);
        if (decrease < config.cost_tolerance * std::max(cost, 1e-300) ||
            delta.lpNorm<Eigen::Infinity>() < config.step_tolerance) {
          converged = true;
        }
      } else {
        lambda *= 10.0;
        if (lambda > 1e12) break;  // stalled; current iterate is the answer
      }
    }
    if (!accepted) {
      converged = true;  // no further progress possible
      break;
    }
  }

  for (const auto& [id, pose] : poses) view.set_pose(id, pose);
  report.iterations = iteration;
  report.final_cost = cost;
  report.converged = converged;
  return report;
}

// --- g2o-style text exchange ------------------------------------------------

void write_g2o(const std::filesystem::path& path, const G2oDocument& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  char buf[512];
  for (const auto& [id, pose] : doc.vertices) {
    const auto& t = pose.translation();
    const auto& q = pose.rotation();
    std::snprintf(buf, sizeof(buf),
                  "VERTEX_SIM3:QUAT %d %.12g %.12g %.12g %.12g %.12g %.12g %.12g %.12g\n",
                  id, t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w(),
                  pose.scale());
    out << buf;
  }
  for (const auto& e : doc.edges) {
    const auto& t = e.measurement.translation();
    const auto& q = e.measurement.rotation();
    std::snprintf(buf, sizeof(buf),
                  "EDGE_SIM3:QUAT %d %d %.12g %.12g %.12g %.12g %.12g %.12g %.12g %.12g",
                  e.room_i, e.room_j, t.x(), t.y(), t.z(), q.x(), q.y(), q.z(),
                  q.w(), e.measurement.scale());
    out << buf;
    for (int r = 0; r < 7; ++r) {
      for (int c = r; c < 7; ++c) {
        std::snprintf(buf, sizeof(buf), " %.12g", e.information(r, c));
        out << buf;
      }
    }
    out << "\n";
  }
}

void write_g2o(const std::filesystem::path& path, const RoomPoseGraphView& view) {
  G2oDocument doc;
  for (const int id : view.room_ids()) doc.vertices[id] = view.pose(id);
  doc.edges = view.factors();
  write_g2o(path, doc);
}

G2oDocument read_g2o(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  G2oDocument doc;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "VERTEX_SIM3:QUAT") {
      int id;
      double tx, ty, tz, qx, qy, qz, qw, s;
      if (!(ss >> id >> tx >> ty >> tz >> qx >> qy >> qz >> qw >> s)) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": malformed vertex");
      }
      doc.vertices[id] = Sim3(Eigen::Quaterniond(qw, qx, qy, qz), {tx, ty, tz}, s);
    } else if (tag == "EDGE_SIM3:QUAT") {
      PoseFactor e;
      double tx, ty, tz, qx, qy, qz, qw, s;
      if (!(ss >> e.room_i >> e.room_j >> tx >> ty >> tz >> qx >> qy >> qz >> qw >> s)) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": malformed edge");
      }
      e.measurement = Sim3(Eigen::Quaterniond(qw, qx, qy, qz), {tx, ty, tz}, s);
      for (int r = 0; r < 7; ++r) {
        for (int c = r; c < 7; ++c) {
          double v;
          if (!(ss >> v)) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": missing information entries");
          }
          e.information(r, c) = v;
          e.information(c, r) = v;
        }
      }
      doc.edges.push_back(std::move(e));
    } else {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": unknown record `" + tag + "`");
    }
  }
  return doc;
}

}  // namespace roomsg
