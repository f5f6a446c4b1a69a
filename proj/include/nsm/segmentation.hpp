#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nsm/core/error.hpp"
#include "nsm/core/geometry.hpp"
#include "nsm/core/kdtree.hpp"

namespace nsm {

struct SegmentationParams {
  double max_distance = 0.2;     ///< linkage radius, meters
  std::size_t min_points = 200;
  std::size_t max_points = 1500;

  void validate() const {
    if (!(max_distance > 0.0)) throw ValidationError("segmentation.max_distance must be > 0");
    if (min_points == 0 || min_points > max_points) {
      throw ValidationError("segmentation requires 0 < min_points <= max_points");
    }
  }
};

struct Segment {
  std::uint32_t id = 0;
  PointCloud points;                 ///< members in ascending input order
  std::vector<std::size_t> indices;  ///< member indices into the clustered cloud
  std::string source_frame_id;

  std::size_t size() const { return points.size(); }
};

/**
 * Connected components of the radius graph (edge iff distance <= max_distance),
 * keeping components with min_points <= size <= max_points. Oversized clusters
 * are dropped, not split. Output is sorted by size descending, ties by the
 * smallest member index; ids follow that order starting at 0.
 */
inline std::vector<Segment> euclidean_cluster(const PointCloud& cloud, const SegmentationParams& params) {
  params.validate();
  std::vector<Segment> out;
  if (cloud.empty()) return out;

  const KdTree tree = KdTree::from_points(cloud.points);
  std::vector<bool> visited(cloud.size(), false);
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<std::size_t> frontier;

  for (std::size_t seed = 0; seed < cloud.size(); ++seed) {
    if (visited[seed]) continue;
    std::vector<std::size_t> members{seed};
    visited[seed] = true;
    frontier.assign(1, seed);
    while (!frontier.empty()) {
      const std::size_t current = frontier.back();
      frontier.pop_back();
      for (std::size_t nb : tree.radius(cloud[current], params.max_distance)) {
        if (visited[nb]) continue;
        visited[nb] = true;
        members.push_back(nb);
        frontier.push_back(nb);
      }
    }
    if (members.size() < params.min_points || members.size() > params.max_points) continue;
    std::sort(members.begin(), members.end());
    clusters.push_back(std::move(members));
  }

  // Seeds are visited in index order, so clusters[i].front() is already ascending; stable sort keeps that tie order.
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  out.reserve(clusters.size());
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    Segment s;
    s.id = static_cast<std::uint32_t>(c);
    s.source_frame_id = cloud.frame_id;
    s.points.frame_id = cloud.frame_id;
    s.points.points.reserve(clusters[c].size());
    for (std::size_t idx : clusters[c]) s.points.points.push_back(cloud[idx]);
    s.indices = std::move(clusters[c]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace nsm
