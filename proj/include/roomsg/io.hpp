#pragma once

#include <filesystem>
#include <string>

#include "roomsg/point_cloud.hpp"
#include "roomsg/trajectory.hpp"

namespace roomsg {

// TUM trajectory format: one `timestamp tx ty tz qx qy qz qw` line per pose,
// whitespace-separated, '#' starts a comment. Scale is not representable in
// this format and is written as 1 on output.
Trajectory read_tum_trajectory(const std::filesystem::path& path);
void write_tum_trajectory(const std::filesystem::path& path, const Trajectory& traj);

// ASCII PLY with float x/y/z and an optional integer `label` property.
PointCloud read_ply(const std::filesystem::path& path);
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace roomsg
