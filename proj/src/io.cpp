#include "roomsg/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace roomsg {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path.string());
  return out;
}

}  // namespace

Trajectory read_tum_trajectory(const std::filesystem::path& path) {
  auto in = open_input(path);
  Trajectory traj;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    double t, tx, ty, tz, qx, qy, qz, qw;
    if (!(ss >> t)) continue;  // blank line
    if (!(ss >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected `timestamp tx ty tz qx qy qz qw`");
    }
    traj.append(t, Sim3(Eigen::Quaterniond(qw, qx, qy, qz), {tx, ty, tz}, 1.0));
  }
  return traj;
}

void write_tum_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  auto out = open_output(path);
  char buf[256];
  out << "# timestamp tx ty tz qx qy qz qw\n";
  for (const auto& s : traj.samples) {
    const auto& t = s.pose.translation();
    const auto& q = s.pose.rotation();
    std::snprintf(buf, sizeof(buf),
                  "%.9f %.12g %.12g %.12g %.12g %.12g %.12g %.12g\n",
                  s.timestamp, t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w());
    out << buf;
  }
}

PointCloud read_ply(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
    throw ParseError(path.string() + ": missing ply magic");
  }
  std::size_t vertex_count = 0;
  bool has_label = false;
  bool in_vertex_element = false;
  int coord_props = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "ascii") throw ParseError(path.string() + ": only ascii ply supported");
    } else if (tok == "element") {
      std::string name;
      ss >> name >> vertex_count;
      in_vertex_element = (name == "vertex");
      if (!in_vertex_element) {
        throw ParseError(path.string() + ": unsupported element `" + name + "`");
      }
    } else if (tok == "property" && in_vertex_element) {
      std::string type, name;
      ss >> type >> name;
      if (name == "x" || name == "y" || name == "z") {
        ++coord_props;
      } else if (name == "label") {
        has_label = true;
      } else {
        throw ParseError(path.string() + ": unsupported property `" + name + "`");
      }
    } else if (tok == "end_header") {
      break;
    }
  }
  if (coord_props != 3) throw ParseError(path.string() + ": need x y z properties");

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  if (has_label) cloud.labels.reserve(vertex_count);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (!std::getline(in, line)) {
      throw ParseError(path.string() + ": truncated vertex list at " +
                       std::to_string(i) + "/" + std::to_string(vertex_count));
    }
    std::istringstream ss(line);
    double x, y, z;
    if (!(ss >> x >> y >> z)) {
      throw ParseError(path.string() + ": bad vertex line " + std::to_string(i));
    }
    cloud.points.emplace_back(x, y, z);
    if (has_label) {
      int label;
      if (!(ss >> label)) {
        throw ParseError(path.string() + ": missing label on vertex " +
                         std::to_string(i));
      }
      cloud.labels.push_back(label);
    }
  }
  return cloud;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  auto out = open_output(path);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_labels()) out << "property int label\n";
  out << "end_header\n";
  char buf[160];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    if (cloud.has_labels()) {
      std::snprintf(buf, sizeof(buf), "%.12g %.12g %.12g %d\n", p.x(), p.y(),
                    p.z(), cloud.labels[i]);
    } else {
      std::snprintf(buf, sizeof(buf), "%.12g %.12g %.12g\n", p.x(), p.y(), p.z());
    }
    out << buf;
  }
}

}  // namespace roomsg
