#include "roomsg/align.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "roomsg/kdtree.hpp"

namespace roomsg {

Sim3 umeyama_align(const std::vector<Eigen::Vector3d>& src,
                   const std::vector<Eigen::Vector3d>& dst, bool with_scale) {
  if (src.size() != dst.size()) {
    throw InvalidInputError("umeyama_align: size mismatch");
  }
  const auto n = static_cast<double>(src.size());
  if (src.size() < 3) {
    throw DegenerateInputError("umeyama_align: need at least 3 correspondences");
  }

  Eigen::Vector3d mu_src = Eigen::Vector3d::Zero(), mu_dst = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    mu_src += src[i];
    mu_dst += dst[i];
  }
  mu_src /= n;
  mu_dst /= n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double var_src = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Eigen::Vector3d ds = src[i] - mu_src;
    cov += (dst[i] - mu_dst) * ds.transpose();
    var_src += ds.squaredNorm();
  }
  cov /= n;
  var_src /= n;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  // Collinear or coincident points leave the rotation underdetermined.
  if (sv[1] <= 1e-12 * std::max(1.0, sv[0]) || var_src <= 1e-24) {
    throw DegenerateInputError("umeyama_align: rank-deficient correspondences");
  }

  Eigen::Vector3d d = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0) d[2] = -1.0;
  const Eigen::Matrix3d R =
      svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();

  double scale = 1.0;
  if (with_scale) {
    scale = sv.dot(d) / var_src;
    if (!(scale > 0.0)) {
      throw DegenerateInputError("umeyama_align: non-positive scale estimate");
    }
  }
  const Eigen::Vector3d t = mu_dst - scale * (R * mu_src);
  return Sim3(Eigen::Quaterniond(R), t, scale);
}

Sim3 umeyama_align(const PointCloud& src, const PointCloud& dst, bool with_scale) {
  return umeyama_align(src.points, dst.points, with_scale);
}

Sim3 umeyama_align(const Trajectory& src, const Trajectory& dst, bool with_scale,
                   double max_dt) {
  const auto matches = associate_by_time(src, dst, max_dt);
  std::vector<Eigen::Vector3d> a, b;
  a.reserve(matches.size());
  b.reserve(matches.size());
  for (const auto& [i, j] : matches) {
    a.push_back(src.samples[i].pose.translation());
    b.push_back(dst.samples[j].pose.translation());
  }
  return umeyama_align(a, b, with_scale);
}

Sim3 icp_align(const PointCloud& src, const PointCloud& dst, const Sim3& initial,
               const IcpConfig& config) {
  if (src.empty() || dst.empty()) throw InvalidInputError("icp_align: empty cloud");
  const KdTree tree(dst.points);

  // Deterministic stride subsampling of the source.
  std::vector<Eigen::Vector3d> sub;
  const std::size_t stride =
      std::max<std::size_t>(1, src.size() / static_cast<std::size_t>(
                                                config.max_correspondences));
  for (std::size_t i = 0; i < src.size(); i += stride) sub.push_back(src.points[i]);

  Sim3 T = initial;
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    std::vector<Eigen::Vector3d> matched_src, matched_dst;
    matched_src.reserve(sub.size());
    matched_dst.reserve(sub.size());
    for (const auto& p : sub) {
      const auto hit = tree.nearest(T * p);
      matched_src.push_back(p);
      matched_dst.push_back(dst.points[hit.index]);
    }
    Sim3 updated;
    try {
      updated = umeyama_align(matched_src, matched_dst, config.with_scale);
    } catch (const DegenerateInputError&) {
      break;  // keep the last valid estimate
    }
    const double delta = sim3_distance(T, updated);
    T = updated;
    if (delta < config.translation_tol) break;
  }
  return T;
}

}  // namespace roomsg
