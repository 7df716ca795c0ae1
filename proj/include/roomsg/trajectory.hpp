#pragma once

#include <utility>
#include <vector>

#include "roomsg/errors.hpp"
#include "roomsg/sim3.hpp"

namespace roomsg {

struct StampedPose {
  double timestamp = 0.0;  // seconds
  Sim3 pose;
};

// Time-ordered pose sequence; timestamps must be strictly increasing.
struct Trajectory {
  std::vector<StampedPose> samples;

  void append(double timestamp, const Sim3& pose) {
    if (!samples.empty() && timestamp <= samples.back().timestamp) {
      throw InvalidInputError("Trajectory: timestamps must be strictly increasing");
    }
    samples.push_back({timestamp, pose});
  }

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// Index pairs (i into a, j into b) of samples whose timestamps agree within
// max_dt. Greedy two-pointer matching; each sample is used at most once.
inline std::vector<std::pair<int, int>> associate_by_time(
    const Trajectory& a, const Trajectory& b, double max_dt) {
  std::vector<std::pair<int, int>> matches;
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const double ta = a.samples[i].timestamp;
    while (j + 1 < b.samples.size() &&
           std::abs(b.samples[j + 1].timestamp - ta) <=
               std::abs(b.samples[j].timestamp - ta)) {
      ++j;
    }
    if (j < b.samples.size() && std::abs(b.samples[j].timestamp - ta) <= max_dt) {
      matches.emplace_back(static_cast<int>(i), static_cast<int>(j));
      ++j;
      if (j >= b.samples.size()) break;
    }
  }
  return matches;
}

}  // namespace roomsg
