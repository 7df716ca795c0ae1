#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "roomsg/scene_graph.hpp"

namespace roomsg {

// One 2D instance mask on the fixed W x H pixel grid, tracked in a frame.
struct MaskObservation {
  int frame_id = -1;
  std::vector<int> mask;  // sorted pixel indices, row-major
  FeatureVector feature;  // unit norm
};

// A sequence of masks for one object candidate tracked across views.
struct MaskTracklet {
  int id = -1;
  std::string seed_label;
  std::vector<MaskObservation> observations;
};

struct TrackletSet {
  int grid_width = 0;
  int grid_height = 0;
  std::vector<MaskTracklet> tracklets;
};

// Intersection over union of two sorted pixel-index sets.
double mask_iou(const std::vector<int>& a, const std::vector<int>& b);

// JSON file with run-length-encoded masks per observation and the grid
// dimensions in the header.
void write_tracklets(const std::filesystem::path& path, const TrackletSet& set);
TrackletSet read_tracklets(const std::filesystem::path& path);

}  // namespace roomsg
