#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nsm/core/cloud_io.hpp"
#include "nsm/core/error.hpp"
#include "nsm/core/geometry.hpp"

namespace nsm {

struct TrajectoryEntry {
  std::string frame_id;
  RigidTransform pose;
};

// One pose per line: `frame_id tx ty tz qx qy qz qw`, quaternion scalar-last.

inline std::vector<TrajectoryEntry> load_trajectory(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("file not found: " + path.string());
  auto in = detail::open_input(path);
  std::vector<TrajectoryEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tok = detail::split_ws(view);
    if (tok.empty()) continue;
    if (tok.size() != 8) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 'frame_id tx ty tz qx qy qz qw'");
    }
    double v[7];
    for (int i = 0; i < 7; ++i) v[i] = detail::parse_double_or_throw(tok[static_cast<std::size_t>(i) + 1], path, line_no);
    const Eigen::Quaterniond q(v[6], v[3], v[4], v[5]);
    if (std::abs(q.norm() - 1.0) > 1e-6) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": quaternion is not unit length");
    }
    out.push_back({std::string(tok[0]), RigidTransform::from_quaternion(q, {v[0], v[1], v[2]})});
  }
  return out;
}

inline std::string format_pose_line(const std::string& frame_id, const RigidTransform& pose) {
  const auto q = pose.quaternion();
  const auto& t = pose.translation();
  using detail::format_double;
  return frame_id + ' ' + format_double(t.x()) + ' ' + format_double(t.y()) + ' ' + format_double(t.z()) + ' ' +
         format_double(q.x()) + ' ' + format_double(q.y()) + ' ' + format_double(q.z()) + ' ' + format_double(q.w());
}

inline void save_trajectory(const std::vector<TrajectoryEntry>& entries, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << "# frame_id tx ty tz qx qy qz qw\n";
  for (const auto& e : entries) out << format_pose_line(e.frame_id, e.pose) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace nsm
