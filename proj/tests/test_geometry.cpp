#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "roomsg/align.hpp"
#include "roomsg/io.hpp"
#include "roomsg/kdtree.hpp"
#include "roomsg/metrics.hpp"
#include "roomsg/rng.hpp"

using namespace roomsg;

namespace {

PointCloud random_cloud(Rng& rng, int n, double extent = 5.0) {
  PointCloud cloud;
  for (int i = 0; i < n; ++i) {
    cloud.add({rng.uniform(-extent, extent), rng.uniform(-extent, extent),
               rng.uniform(-extent, extent)});
  }
  return cloud;
}

// Brute-force oracle for nearest-neighbor distances.
double brute_force_nn(const Eigen::Vector3d& q, const PointCloud& cloud) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : cloud.points) best = std::min(best, (p - q).norm());
  return best;
}

Sim3 random_sim3(Rng& rng) {
  return sim3_exp(make_tangent(rng.normal_vec3(1.0),
                               rng.uniform(0.0, 1.2) * rng.unit_vec3(),
                               rng.uniform(-0.5, 0.5)));
}

}  // namespace

TEST_CASE("kd-tree agrees with brute force") {
  Rng rng(21);
  const PointCloud cloud = random_cloud(rng, 500);
  const KdTree tree(cloud.points);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d q = rng.normal_vec3(4.0);
    CHECK(tree.nearest_distance(q) == doctest::Approx(brute_force_nn(q, cloud))
                                          .epsilon(1e-12));
  }
}

TEST_CASE("transform_points: identity, translation, inverse roundtrip") {
  Rng rng(22);
  PointCloud cloud = random_cloud(rng, 100);
  cloud.labels.assign(cloud.size(), 7);

  const PointCloud same = transform_points(Sim3::identity(), cloud);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK((same.points[i] - cloud.points[i]).norm() == 0.0);
  }
  CHECK(same.labels == cloud.labels);

  PointCloud origin;
  origin.add(Eigen::Vector3d::Zero());
  const PointCloud moved =
      transform_points(Sim3::from_translation({1, 0, 0}), origin);
  CHECK((moved.points[0] - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);

  const Sim3 T = random_sim3(rng);
  const PointCloud back = transform_points(T.inverse(), transform_points(T, cloud));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK((back.points[i] - cloud.points[i]).norm() < 1e-9);
  }
}

TEST_CASE("umeyama: identity on identical sets and exact recovery") {
  Rng rng(23);
  const PointCloud cloud = random_cloud(rng, 50);
  const Sim3 id = umeyama_align(cloud, cloud, true);
  CHECK(sim3_log(id).norm() < 1e-9);

  const Sim3 T = random_sim3(rng);
  const PointCloud moved = transform_points(T, cloud);
  const Sim3 recovered = umeyama_align(cloud, moved, true);
  CHECK(sim3_distance(recovered, T) < 1e-9);

  // Without scale estimation the recovered scale stays 1.
  const Sim3 rigid = umeyama_align(cloud, moved, false);
  CHECK(rigid.scale() == 1.0);
}

TEST_CASE("umeyama residual stays near the noise floor") {
  Rng rng(24);
  const PointCloud cloud = random_cloud(rng, 200);
  const Sim3 T = random_sim3(rng);
  PointCloud moved = transform_points(T, cloud);
  const double sigma = 0.01;
  for (auto& p : moved.points) p += rng.normal_vec3(sigma);
  const Sim3 recovered = umeyama_align(cloud, moved, true);
  double sq = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    sq += (moved.points[i] - recovered * cloud.points[i]).squaredNorm();
  }
  const double rmse = std::sqrt(sq / cloud.size());
  CHECK(rmse <= 2.0 * sigma);
}

TEST_CASE("umeyama rejects degenerate correspondences") {
  PointCloud line;
  for (int i = 0; i < 10; ++i) line.add({double(i), 0.0, 0.0});
  CHECK_THROWS_AS(umeyama_align(line, line, true), DegenerateInputError);

  PointCloud coincident;
  for (int i = 0; i < 5; ++i) coincident.add({1.0, 2.0, 3.0});
  CHECK_THROWS_AS(umeyama_align(coincident, coincident, true), DegenerateInputError);

  PointCloud two;
  two.add({0, 0, 0});
  two.add({1, 0, 0});
  CHECK_THROWS_AS(umeyama_align(two, two, true), DegenerateInputError);
}

TEST_CASE("chamfer: zero on identical clouds, exact on point pairs") {
  Rng rng(25);
  const PointCloud cloud = random_cloud(rng, 300);
  CHECK(chamfer_distance(cloud, cloud) == 0.0);

  PointCloud a, b;
  a.add({0, 0, 0});
  b.add({1, 0, 0});
  CHECK(chamfer_distance(a, b) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(chamfer_distance(a, b) == chamfer_distance(b, a));
  CHECK_THROWS_AS(chamfer_distance(PointCloud{}, cloud), InvalidInputError);
}

TEST_CASE("chamfer of offset parallel planes approximates the offset") {
  Rng rng(26);
  PointCloud plane_a, plane_b;
  const double d = 0.5;
  for (int i = 0; i < 8000; ++i) {
    plane_a.add({rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0), 0.0});
    plane_b.add({rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0), d});
  }
  const double c = chamfer_distance(plane_a, plane_b);
  CHECK(c == doctest::Approx(d).epsilon(0.05));
}

TEST_CASE("chamfer symmetry on random clouds") {
  Rng rng(27);
  const PointCloud a = random_cloud(rng, 150);
  const PointCloud b = random_cloud(rng, 80);
  CHECK(chamfer_distance(a, b) == chamfer_distance(b, a));
}

TEST_CASE("ate: zero for identical trajectories and scaled copies") {
  Rng rng(28);
  Trajectory gt;
  for (int i = 0; i < 60; ++i) {
    gt.append(i * 0.1, Sim3(so3_exp(0.02 * i * rng.unit_vec3()),
                            {std::sin(0.2 * i), 0.5 * i, std::cos(0.3 * i)}, 1.0));
  }
  CHECK(ate_rmse(gt, gt) == doctest::Approx(0.0).epsilon(1e-12));

  Trajectory scaled;
  for (const auto& s : gt.samples) {
    scaled.append(s.timestamp,
                  Sim3(s.pose.rotation(), 2.0 * s.pose.translation(), 1.0));
  }
  CHECK(ate_rmse(scaled, gt, {AteAlignment::kSim3, 0.02}) < 1e-9);
  // A rigid alignment cannot undo the scaling.
  CHECK(ate_rmse(scaled, gt, {AteAlignment::kSe3, 0.02}) > 0.1);
}

TEST_CASE("ate under isotropic noise lands near sigma") {
  Rng rng(29);
  Trajectory gt, noisy;
  const double sigma = 0.1;
  for (int i = 0; i < 400; ++i) {
    const Eigen::Vector3d pos(0.05 * i, std::sin(0.07 * i), std::cos(0.05 * i));
    gt.append(i * 0.1, Sim3::from_translation(pos));
    noisy.append(i * 0.1, Sim3::from_translation(pos + rng.normal_vec3(sigma)));
  }
  const double ate = ate_rmse(noisy, gt, {AteAlignment::kSim3, 0.02});
  CHECK(ate == doctest::Approx(sigma * std::sqrt(3.0)).epsilon(0.2));
}

TEST_CASE("ate invariant to a global similarity when aligned") {
  Rng rng(30);
  Trajectory est, gt;
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d pos(0.1 * i, std::sin(0.3 * i), 0.0);
    gt.append(i * 0.1, Sim3::from_translation(pos));
    est.append(i * 0.1, Sim3::from_translation(pos + rng.normal_vec3(0.05)));
  }
  const double base = ate_rmse(est, gt);
  const Sim3 G = random_sim3(rng);
  Trajectory moved;
  for (const auto& s : est.samples) moved.append(s.timestamp, G * s.pose);
  CHECK(ate_rmse(moved, gt) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("ate needs at least 3 associations") {
  Trajectory a, b;
  a.append(0.0, Sim3::identity());
  a.append(1.0, Sim3::identity());
  b.append(0.0, Sim3::identity());
  b.append(1.0, Sim3::identity());
  CHECK_THROWS_AS(ate_rmse(a, b), InsufficientOverlapError);

  // Timestamps outside the association window do not pair up.
  Trajectory c;
  c.append(10.0, Sim3::identity());
  c.append(11.0, Sim3::identity());
  c.append(12.0, Sim3::identity());
  CHECK_THROWS_AS(ate_rmse(a, c), InsufficientOverlapError);
}

TEST_CASE("tum trajectory file roundtrip") {
  Rng rng(31);
  Trajectory traj;
  for (int i = 0; i < 20; ++i) {
    traj.append(0.1 * i + 0.001,
                Sim3(so3_exp(rng.uniform(0.0, 1.0) * rng.unit_vec3()),
                     rng.normal_vec3(2.0), 1.0));
  }
  const auto path = std::filesystem::temp_directory_path() / "roomsg_test_traj.tum";
  write_tum_trajectory(path, traj);
  const Trajectory back = read_tum_trajectory(path);
  REQUIRE(back.size() == traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    CHECK(back.samples[i].timestamp ==
          doctest::Approx(traj.samples[i].timestamp).epsilon(1e-9));
    CHECK(sim3_distance(back.samples[i].pose, traj.samples[i].pose) < 1e-9);
  }
  std::filesystem::remove(path);
}

TEST_CASE("ply roundtrip with and without labels") {
  Rng rng(32);
  PointCloud cloud = random_cloud(rng, 40);
  const auto path = std::filesystem::temp_directory_path() / "roomsg_test_cloud.ply";
  write_ply(path, cloud);
  PointCloud back = read_ply(path);
  REQUIRE(back.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK((back.points[i] - cloud.points[i]).norm() < 1e-9);
  }

  cloud.labels.assign(cloud.size(), 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) cloud.labels[i] = int(i % 5);
  write_ply(path, cloud);
  back = read_ply(path);
  CHECK(back.labels == cloud.labels);
  std::filesystem::remove(path);
}

TEST_CASE("truncated ply fails to parse") {
  const auto path = std::filesystem::temp_directory_path() / "roomsg_trunc.ply";
  {
    std::ofstream out(path);
    out << "ply\nformat ascii 1.0\nelement vertex 5\n"
           "property double x\nproperty double y\nproperty double z\n"
           "end_header\n0 0 0\n1 1 1\n";
  }
  CHECK_THROWS_AS(read_ply(path), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("voxel downsample keeps one point per cell") {
  PointCloud cloud;
  cloud.add({0.001, 0.001, 0.001});
  cloud.add({0.003, 0.002, 0.001});  // same 2 cm voxel
  cloud.add({1.0, 1.0, 1.0});
  const PointCloud down = voxel_downsample(cloud, 0.02);
  CHECK(down.size() == 2);
}

TEST_CASE("icp refines a small misalignment") {
  Rng rng(33);
  PointCloud cloud;
  for (int i = 0; i < 600; ++i) {
    // Points on a box shell so the alignment is well constrained.
    const int face = int(rng.uniform_index(3));
    Eigen::Vector3d p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    p[face] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    cloud.add(p);
  }
  const Sim3 T = sim3_exp(make_tangent({0.05, -0.03, 0.02}, {0.02, 0.03, -0.01}, 0.02));
  const PointCloud moved = transform_points(T, cloud);
  const Sim3 aligned = icp_align(moved, cloud, Sim3::identity());
  CHECK(sim3_distance(aligned, T.inverse()) < 0.02);
  CHECK(chamfer_distance(transform_points(aligned, moved), cloud) < 0.01);
}
