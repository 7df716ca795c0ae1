#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "roomsg/errors.hpp"

namespace roomsg {

using Matrix7d = Eigen::Matrix<double, 7, 7>;

// Tangent vector of Sim(3), layout [rho(3), phi(3), sigma]:
// translational part, rotational part (radians), log scale.
using Sim3Tangent = Eigen::Matrix<double, 7, 1>;

inline Sim3Tangent make_tangent(const Eigen::Vector3d& rho,
                                const Eigen::Vector3d& phi, double sigma) {
  Sim3Tangent xi;
  xi << rho, phi, sigma;
  return xi;
}

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(),
      v.z(), 0, -v.x(),
      -v.y(), v.x(), 0;
  return m;
}

// 3D similarity transform acting as x -> scale * R * x + t.
//
// Stored as (unit quaternion, translation, scale) so repeated composition
// cannot drift off the manifold; the quaternion is renormalized on
// construction and scale must be positive.
class Sim3 {
 public:
  Sim3() : q_(Eigen::Quaterniond::Identity()), t_(Eigen::Vector3d::Zero()), s_(1.0) {}

  Sim3(const Eigen::Quaterniond& q, const Eigen::Vector3d& t, double s)
      : q_(q.normalized()), t_(t), s_(s) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw InvalidInputError("Sim3: scale must be positive and finite");
    }
    if (q.norm() < 1e-12) {
      throw InvalidInputError("Sim3: zero quaternion");
    }
  }

  static Sim3 identity() { return Sim3(); }

  static Sim3 from_rotation(const Eigen::Quaterniond& q) {
    return Sim3(q, Eigen::Vector3d::Zero(), 1.0);
  }

  static Sim3 from_translation(const Eigen::Vector3d& t) {
    return Sim3(Eigen::Quaterniond::Identity(), t, 1.0);
  }

  static Sim3 from_scale(double s) {
    return Sim3(Eigen::Quaterniond::Identity(), Eigen::Vector3d::Zero(), s);
  }

  const Eigen::Quaterniond& rotation() const { return q_; }
  const Eigen::Vector3d& translation() const { return t_; }
  double scale() const { return s_; }

  Eigen::Matrix3d rotation_matrix() const { return q_.toRotationMatrix(); }

  // Homogeneous 4x4 matrix [sR t; 0 1], produced on demand.
  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = s_ * rotation_matrix();
    m.topRightCorner<3, 1>() = t_;
    return m;
  }

  Eigen::Vector3d operator*(const Eigen::Vector3d& x) const {
    return s_ * (q_ * x) + t_;
  }

  // Group composition: (a*b)(x) = a(b(x)).
  Sim3 operator*(const Sim3& other) const {
    return Sim3(q_ * other.q_, s_ * (q_ * other.t_) + t_, s_ * other.s_);
  }

  Sim3 inverse() const {
    const Eigen::Quaterniond qi = q_.conjugate();
    return Sim3(qi, -(qi * t_) / s_, 1.0 / s_);
  }

  // Rotation angle in [0, pi].
  double rotation_angle() const {
    const double n = q_.vec().norm();
    const double w = std::abs(q_.w());
    return 2.0 * std::atan2(n, w);
  }

  // Adjoint matrix: Adj(T) * xi = log(T * exp(xi) * T^-1).
  Matrix7d adjoint() const {
    const Eigen::Matrix3d R = rotation_matrix();
    Matrix7d adj = Matrix7d::Zero();
    adj.block<3, 3>(0, 0) = s_ * R;
    adj.block<3, 3>(0, 3) = skew(t_) * R;
    adj.block<3, 1>(0, 6) = -t_;
    adj.block<3, 3>(3, 3) = R;
    adj(6, 6) = 1.0;
    return adj;
  }

 private:
  Eigen::Quaterniond q_;
  Eigen::Vector3d t_;
  double s_;
};

inline Sim3 sim3_compose(const Sim3& a, const Sim3& b) { return a * b; }

// --- SO(3) exp/log on quaternions -----------------------------------------

inline Eigen::Quaterniond so3_exp(const Eigen::Vector3d& phi) {
  const double theta2 = phi.squaredNorm();
  const double theta = std::sqrt(theta2);
  double w, k;  // q = (w, k * phi)
  if (theta < 1e-4) {
    w = 1.0 - theta2 / 8.0 + theta2 * theta2 / 384.0;
    k = 0.5 - theta2 / 48.0 + theta2 * theta2 / 3840.0;
  } else {
    w = std::cos(0.5 * theta);
    k = std::sin(0.5 * theta) / theta;
  }
  return Eigen::Quaterniond(w, k * phi.x(), k * phi.y(), k * phi.z());
}

// Principal-branch rotation log; throws BranchAmbiguityError within
// branch_eps of the pi branch cut where the axis is not identifiable.
inline Eigen::Vector3d so3_log(const Eigen::Quaterniond& q_in,
                               double branch_eps = 1e-6) {
  Eigen::Quaterniond q = q_in.normalized();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  const double n = q.vec().norm();
  const double theta = 2.0 * std::atan2(n, q.w());
  if (theta > M_PI - branch_eps) {
    throw BranchAmbiguityError("so3_log: rotation angle within " +
                               std::to_string(branch_eps) + " of pi");
  }
  double k;  // phi = k * q.vec()
  if (n < 1e-6) {
    const double w2 = q.w() * q.w();
    k = 2.0 / q.w() * (1.0 - n * n / (3.0 * w2));
  } else {
    k = theta / n;
  }
  return k * q.vec();
}

// --- Sim(3) exp/log --------------------------------------------------------

namespace detail {

// W(phi, sigma) = sum_{k>=0} (skew(phi) + sigma*I)^k / (k+1)!
// so that exp([rho, phi, sigma]) has translation W * rho. The series is
// entire, so direct summation is exact to machine precision with no
// small-angle branches.
inline Eigen::Matrix3d sim3_translation_jacobian(const Eigen::Vector3d& phi,
                                                 double sigma) {
  const Eigen::Matrix3d M = skew(phi) + sigma * Eigen::Matrix3d::Identity();
  Eigen::Matrix3d term = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d sum = term;  // k = 0 term: I / 1!
  for (int k = 1; k <= 60; ++k) {
    term = (term * M) / static_cast<double>(k + 1);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  return sum;
}

}  // namespace detail

inline Sim3 sim3_exp(const Sim3Tangent& xi) {
  const Eigen::Vector3d rho = xi.head<3>();
  const Eigen::Vector3d phi = xi.segment<3>(3);
  const double sigma = xi[6];
  const Eigen::Matrix3d W = detail::sim3_translation_jacobian(phi, sigma);
  return Sim3(so3_exp(phi), W * rho, std::exp(sigma));
}

inline Sim3Tangent sim3_log(const Sim3& T) {
  const Eigen::Vector3d phi = so3_log(T.rotation());
  const double sigma = std::log(T.scale());
  const Eigen::Matrix3d W = detail::sim3_translation_jacobian(phi, sigma);
  // W is invertible for rotation angle < pi and finite sigma.
  const Eigen::Vector3d rho = W.lu().solve(T.translation());
  return make_tangent(rho, phi, sigma);
}

// --- sim(3) adjoint machinery (used by the pose-graph optimizer) -----------

// ad(xi) * eta = bracket [xi, eta] on sim(3).
inline Matrix7d sim3_ad(const Sim3Tangent& xi) {
  const Eigen::Vector3d rho = xi.head<3>();
  const Eigen::Vector3d phi = xi.segment<3>(3);
  const double sigma = xi[6];
  Matrix7d ad = Matrix7d::Zero();
  ad.block<3, 3>(0, 0) = skew(phi) + sigma * Eigen::Matrix3d::Identity();
  ad.block<3, 3>(0, 3) = skew(rho);
  ad.block<3, 1>(0, 6) = -rho;
  ad.block<3, 3>(3, 3) = skew(phi);
  return ad;
}

// Left Jacobian J_l(xi) = sum_{k>=0} ad(xi)^k / (k+1)!, again summed as an
// entire series. Invertible whenever the rotation angle stays below pi.
inline Matrix7d sim3_left_jacobian(const Sim3Tangent& xi) {
  const Matrix7d A = sim3_ad(xi);
  Matrix7d term = Matrix7d::Identity();
  Matrix7d sum = term;
  for (int k = 1; k <= 80; ++k) {
    term = (term * A) / static_cast<double>(k + 1);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  return sum;
}

// Inverse right Jacobian: d/d eps log(exp(xi) * exp(eps)) at eps = 0.
inline Matrix7d sim3_inv_right_jacobian(const Sim3Tangent& xi) {
  return sim3_left_jacobian(-xi).lu().solve(Matrix7d::Identity());
}

// Inverse left Jacobian: d/d eps log(exp(eps) * exp(xi)) at eps = 0.
inline Matrix7d sim3_inv_left_jacobian(const Sim3Tangent& xi) {
  return sim3_left_jacobian(xi).lu().solve(Matrix7d::Identity());
}

// Tangent-space distance between two transforms.
inline double sim3_distance(const Sim3& a, const Sim3& b) {
  return sim3_log(a.inverse() * b).norm();
}

}  // namespace roomsg
