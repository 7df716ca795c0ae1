#include "roomsg/tracklet.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "roomsg/errors.hpp"

namespace roomsg {

using nlohmann::json;

double mask_iou(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::size_t i = 0, j = 0, inter = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

json encode_rle(const std::vector<int>& mask) {
  json runs = json::array();
  std::size_t i = 0;
  while (i < mask.size()) {
    std::size_t j = i + 1;
    while (j < mask.size() && mask[j] == mask[j - 1] + 1) ++j;
    runs.push_back(json::array({mask[i], static_cast<int>(j - i)}));
    i = j;
  }
  return runs;
}

std::vector<int> decode_rle(const json& runs, const std::string& path,
                            int grid_size) {
  std::vector<int> mask;
  if (!runs.is_array()) throw ParseError(path + ": expected array of runs");
  for (const auto& run : runs) {
    if (!run.is_array() || run.size() != 2) {
      throw ParseError(path + ": each run must be [start, length]");
    }
    const int start = run[0].get<int>();
    const int length = run[1].get<int>();
    if (start < 0 || length <= 0 || start + length > grid_size) {
      throw ParseError(path + ": run [" + std::to_string(start) + ", " +
                       std::to_string(length) + "] outside grid");
    }
    for (int k = 0; k < length; ++k) mask.push_back(start + k);
  }
  if (!std::is_sorted(mask.begin(), mask.end())) {
    throw ParseError(path + ": runs must be sorted and non-overlapping");
  }
  return mask;
}

}  // namespace

void write_tracklets(const std::filesystem::path& path, const TrackletSet& set) {
  json doc;
  doc["grid_width"] = set.grid_width;
  doc["grid_height"] = set.grid_height;
  json tracklets = json::array();
  for (const auto& t : set.tracklets) {
    json tj;
    tj["id"] = t.id;
    tj["seed_label"] = t.seed_label;
    json obs = json::array();
    for (const auto& o : t.observations) {
      json oj;
      oj["frame_id"] = o.frame_id;
      oj["mask_rle"] = encode_rle(o.mask);
      json feat = json::array();
      for (int i = 0; i < o.feature.size(); ++i) feat.push_back(o.feature[i]);
      oj["feature"] = std::move(feat);
      obs.push_back(std::move(oj));
    }
    tj["observations"] = std::move(obs);
    tracklets.push_back(std::move(tj));
  }
  doc["tracklets"] = std::move(tracklets);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

TrackletSet read_tracklets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  TrackletSet set;
  try {
    set.grid_width = doc.at("grid_width").get<int>();
    set.grid_height = doc.at("grid_height").get<int>();
    const int grid_size = set.grid_width * set.grid_height;
    int ti = 0;
    for (const auto& tj : doc.at("tracklets")) {
      const std::string tpath = "$.tracklets[" + std::to_string(ti++) + "]";
      MaskTracklet t;
      t.id = tj.at("id").get<int>();
      t.seed_label = tj.at("seed_label").get<std::string>();
      int oi = 0;
      for (const auto& oj : tj.at("observations")) {
        const std::string opath = tpath + ".observations[" + std::to_string(oi++) + "]";
        MaskObservation o;
        o.frame_id = oj.at("frame_id").get<int>();
        o.mask = decode_rle(oj.at("mask_rle"), opath + ".mask_rle", grid_size);
        if (o.mask.empty()) throw ParseError(opath + ": empty mask");
        const auto& feat = oj.at("feature");
        o.feature.resize(feat.size());
        for (std::size_t i = 0; i < feat.size(); ++i) {
          o.feature[static_cast<int>(i)] = feat[i].get<double>();
        }
        t.observations.push_back(std::move(o));
      }
      set.tracklets.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return set;
}

}  // namespace roomsg
