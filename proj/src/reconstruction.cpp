#include "roomsg/reconstruction.hpp"

#include <fstream>
#include <sstream>

#include "roomsg/io.hpp"

namespace roomsg {

RoomReconstruction scale_reconstruction(const RoomReconstruction& recon,
                                        double scale) {
  if (!(scale > 0)) throw InvalidInputError("scale_reconstruction: scale <= 0");
  RoomReconstruction out;
  for (const auto& [fid, pose] : recon.frame_poses) {
    out.frame_poses.emplace(
        fid, Sim3(pose.rotation(), scale * pose.translation(), pose.scale()));
  }
  for (std::size_t i = 0; i < recon.points.size(); ++i) {
    out.points.points.push_back(scale * recon.points.points[i]);
  }
  out.points.labels = recon.points.labels;
  for (const auto& [fid, pm] : recon.per_frame_points) {
    FramePointmap scaled;
    scaled.pixels = pm.pixels;
    for (const auto& p : pm.cloud.points) scaled.cloud.points.push_back(scale * p);
    scaled.cloud.labels = pm.cloud.labels;
    out.per_frame_points.emplace(fid, std::move(scaled));
  }
  return out;
}

ReplayProvider::ReplayProvider(const std::filesystem::path& dir) : dir_(dir) {
  if (!std::filesystem::is_directory(dir_)) {
    throw InvalidInputError("ReplayProvider: not a directory: " + dir_.string());
  }
  const auto pairs_file = dir_ / "pairs.txt";
  if (std::filesystem::exists(pairs_file)) {
    std::ifstream in(pairs_file);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::istringstream ss(line);
      int p, q;
      double tx, ty, tz, qx, qy, qz, qw, s;
      if (!(ss >> p)) continue;
      if (!(ss >> q >> tx >> ty >> tz >> qx >> qy >> qz >> qw >> s)) {
        throw ParseError(pairs_file.string() + ":" + std::to_string(line_no) +
                         ": expected `p q tx ty tz qx qy qz qw s`");
      }
      pairs_[{p, q}] = Sim3(Eigen::Quaterniond(qw, qx, qy, qz), {tx, ty, tz}, s);
    }
  }
}

RoomReconstruction ReplayProvider::reconstruct_batch(
    const std::vector<FrameRecord>& frames) {
  if (frames.size() < 2) {
    throw InvalidInputError("reconstruct_batch: need at least 2 frames");
  }
  const auto batch_dir = dir_ / ("batch_" + std::to_string(frames.front().id));
  if (!std::filesystem::is_directory(batch_dir)) {
    throw ReconstructionFailedError("ReplayProvider: no precomputed batch at " +
                                    batch_dir.string());
  }
  // Frame ids sit in the timestamp column of the TUM file.
  const Trajectory poses = read_tum_trajectory(batch_dir / "poses.tum");
  RoomReconstruction recon;
  for (const auto& s : poses.samples) {
    recon.frame_poses.emplace(static_cast<int>(std::llround(s.timestamp)), s.pose);
  }
  for (const auto& frame : frames) {
    if (!recon.frame_poses.count(frame.id)) {
      throw ReconstructionFailedError("ReplayProvider: batch at " +
                                      batch_dir.string() + " misses frame " +
                                      std::to_string(frame.id));
    }
  }
  recon.points = read_ply(batch_dir / "points.ply");
  return recon;
}

RelativePoseEstimate ReplayProvider::relative_pose(int frame_p, int frame_q) {
  RelativePoseEstimate est;
  if (frame_p == frame_q) {
    est.pose = Sim3::identity();
    est.valid = true;
    est.confidence = 1.0;
    return est;
  }
  const auto it = pairs_.find({frame_p, frame_q});
  if (it != pairs_.end()) {
    est.pose = it->second;
    est.valid = true;
    est.confidence = 1.0;
    return est;
  }
  const auto rev = pairs_.find({frame_q, frame_p});
  if (rev != pairs_.end()) {
    est.pose = rev->second.inverse();
    est.valid = true;
    est.confidence = 1.0;
  }
  return est;
}

}  // namespace roomsg
