#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/SVD>

#include "nsm/core/error.hpp"
#include "nsm/core/geometry.hpp"
#include "nsm/core/random.hpp"
#include "nsm/core/segment_types.hpp"

namespace nsm {

/// One accepted match: source key pose, target key pose and its classifier score.
struct Correspondence {
  std::uint32_t source_id = 0;
  std::uint32_t target_id = 0;
  KeyPose source;
  KeyPose target;
  double weight = 0.0;
};

using CorrespondenceSet = std::vector<Correspondence>;

/// The algebraic minimum for a 6-DoF fit.
inline constexpr std::size_t kMinPoseMatches = 3;

struct ConsistencyParams {
  double epsilon = 0.4;              ///< meters
  std::size_t min_cluster_size = 4;  ///< tau

  void validate() const {
    if (!(epsilon > 0.0)) throw ValidationError("registration.epsilon must be > 0");
    if (min_cluster_size < kMinPoseMatches) throw ValidationError("registration.min_cluster_size must be >= 3");
  }
};

struct RansacParams {
  std::size_t iterations = 1000;
  double inlier_radius = 0.4;  ///< meters
  std::uint64_t seed = 0;

  void validate() const {
    if (iterations < 1) throw ValidationError("registration.ransac_iterations must be >= 1");
    if (!(inlier_radius > 0.0)) throw ValidationError("registration.inlier_radius must be > 0");
  }
};

enum class LocalizationStatus { localized, insufficient_matches, ransac_failed };

inline std::string_view to_string(LocalizationStatus s) {
  switch (s) {
    case LocalizationStatus::localized: return "localized";
    case LocalizationStatus::insufficient_matches: return "insufficient_matches";
    case LocalizationStatus::ransac_failed: return "ransac_failed";
  }
  return "unknown";
}

inline LocalizationStatus parse_status(std::string_view s) {
  if (s == "localized") return LocalizationStatus::localized;
  if (s == "insufficient_matches") return LocalizationStatus::insufficient_matches;
  if (s == "ransac_failed") return LocalizationStatus::ransac_failed;
  throw ParseError("unknown localization status '" + std::string(s) + "'");
}

struct LocalizationResult {
  RigidTransform transform;  ///< source -> target
  CorrespondenceSet inliers;
  std::size_t consistency_cluster_size = 0;
  LocalizationStatus status = LocalizationStatus::insufficient_matches;
  // Pipeline bookkeeping, filled by localize().
  std::size_t source_segments = 0;
  std::size_t candidates = 0;
  std::size_t accepted_matches = 0;
};

struct ConsistencyResult {
  CorrespondenceSet cluster;  ///< empty unless largest_cluster >= tau
  std::size_t largest_cluster = 0;
  LocalizationStatus status = LocalizationStatus::insufficient_matches;
};

/// | ||k_tp - k_tq|| - ||k_sp - k_sq|| | < epsilon, on key-pose positions.
inline bool pairwise_consistent(const Correspondence& p, const Correspondence& q, double epsilon) {
  const double dt = (p.target.position - q.target.position).norm();
  const double ds = (p.source.position - q.source.position).norm();
  return std::abs(dt - ds) < epsilon;
}

/**
 * @brief Greedy geometric-consistency grouping.
 *
 * Clusters are seeded with the highest-weight unused correspondence and grown
 * by scanning the rest in weight order, adding those consistent with every
 * current member. Each correspondence joins at most one cluster. The largest
 * cluster (first formed on ties) is returned if it reaches tau.
 */
inline ConsistencyResult consistency_filter(std::span<const Correspondence> set, const ConsistencyParams& params) {
  params.validate();
  const std::size_t n = set.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return set[a].weight > set[b].weight; });

  std::vector<std::uint8_t> adjacent(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      adjacent[i * n + j] = adjacent[j * n + i] = pairwise_consistent(set[i], set[j], params.epsilon) ? 1 : 0;

  std::vector<bool> used(n, false);
  std::vector<std::size_t> best;
  for (std::size_t seed_pos = 0; seed_pos < n; ++seed_pos) {
    const std::size_t seed = order[seed_pos];
    if (used[seed]) continue;
    std::vector<std::size_t> cluster{seed};
    used[seed] = true;
    for (std::size_t pos = seed_pos + 1; pos < n; ++pos) {
      const std::size_t cand = order[pos];
      if (used[cand]) continue;
      const bool fits = std::all_of(cluster.begin(), cluster.end(), [&](std::size_t m) { return adjacent[cand * n + m] != 0; });
      if (fits) {
        cluster.push_back(cand);
        used[cand] = true;
      }
    }
    if (cluster.size() > best.size()) best = std::move(cluster);
  }

  ConsistencyResult out;
  out.largest_cluster = best.size();
  if (best.size() >= params.min_cluster_size) {
    out.status = LocalizationStatus::localized;
    for (std::size_t i : best) out.cluster.push_back(set[i]);
  }
  return out;
}

/**
 * Least-squares rigid alignment dst ~ R src + t (Kabsch, SVD with reflection
 * correction). Needs at least 3 pairs; collinear input leaves the rotation
 * about the common line undetermined.
 */
inline RigidTransform fit_rigid_transform(std::span<const Point> src, std::span<const Point> dst) {
  if (src.size() != dst.size() || src.size() < kMinPoseMatches) {
    throw ValidationError("fit_rigid_transform: need >= 3 paired points");
  }
  const double n = static_cast<double>(src.size());
  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= n;
  cd /= n;
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) h.noalias() += (src[i] - cs) * (dst[i] - cd).transpose();

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d correction = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) correction(2, 2) = -1.0;
  Eigen::Matrix3d r = svd.matrixV() * correction * svd.matrixU().transpose();

  // Re-orthonormalize against SVD round-off so the result passes RigidTransform validation.
  const Eigen::JacobiSVD<Eigen::Matrix3d> clean(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  r = clean.matrixU() * clean.matrixV().transpose();
  return RigidTransform(r, cd - r * cs);
}

namespace detail {

/// Twice the triangle area; tiny values mean the sample cannot fix a rotation.
inline double triangle_spread(const Point& a, const Point& b, const Point& c) { return (b - a).cross(c - a).norm(); }

inline constexpr double kMinTriangleSpread = 1e-3;

inline std::vector<std::size_t> inliers_of(std::span<const Correspondence> set, const RigidTransform& t, double radius) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if ((t.apply(set[i].source.position) - set[i].target.position).norm() <= radius) out.push_back(i);
  }
  return out;
}

inline RigidTransform fit_subset(std::span<const Correspondence> set, std::span<const std::size_t> idx) {
  std::vector<Point> src, dst;
  src.reserve(idx.size());
  dst.reserve(idx.size());
  for (auto i : idx) {
    src.push_back(set[i].source.position);
    dst.push_back(set[i].target.position);
  }
  return fit_rigid_transform(src, dst);
}

inline bool non_collinear(std::span<const Correspondence> set, std::span<const std::size_t> idx) {
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      for (std::size_t c = b + 1; c < idx.size(); ++c)
        if (triangle_spread(set[idx[a]].source.position, set[idx[b]].source.position, set[idx[c]].source.position) >=
            kMinTriangleSpread)
          return true;
  return false;
}

}  // namespace detail

/**
 * @brief RANSAC over key-pose positions, then a least-squares refit on the inliers.
 *
 * Each iteration draws 3 distinct correspondences from a seeded stream, skips
 * collinear samples, fits, and counts correspondences with
 * ||T k_s - k_t|| <= inlier_radius. The best hypothesis (first one on ties)
 * is refit on its inliers; the refit is kept unless it loses inliers.
 */
inline LocalizationResult estimate_pose(std::span<const Correspondence> set, const RansacParams& params) {
  params.validate();
  LocalizationResult result;
  result.consistency_cluster_size = set.size();
  if (set.size() < kMinPoseMatches) {
    result.status = LocalizationStatus::insufficient_matches;
    return result;
  }

  Rng rng = make_rng(params.seed, {0x5a4cULL});
  const std::size_t n = set.size();
  std::vector<std::size_t> best_inliers;
  RigidTransform best_transform;
  for (std::size_t it = 0; it < params.iterations; ++it) {
    std::size_t s[3];
    s[0] = uniform_index(rng, n);
    do s[1] = uniform_index(rng, n); while (s[1] == s[0]);
    do s[2] = uniform_index(rng, n); while (s[2] == s[0] || s[2] == s[1]);
    const auto &a = set[s[0]].source.position, &b = set[s[1]].source.position, &c = set[s[2]].source.position;
    if (detail::triangle_spread(a, b, c) < detail::kMinTriangleSpread) continue;
    const RigidTransform hypothesis = detail::fit_subset(set, s);
    auto inliers = detail::inliers_of(set, hypothesis, params.inlier_radius);
    if (inliers.size() > best_inliers.size()) {
      best_inliers = std::move(inliers);
      best_transform = hypothesis;
      if (best_inliers.size() == n) break;
    }
  }

  if (best_inliers.size() < kMinPoseMatches) {
    result.status = LocalizationStatus::ransac_failed;
    return result;
  }

  if (detail::non_collinear(set, best_inliers)) {
    const RigidTransform refit = detail::fit_subset(set, best_inliers);
    auto refit_inliers = detail::inliers_of(set, refit, params.inlier_radius);
    if (refit_inliers.size() >= best_inliers.size()) {
      best_transform = refit;
      best_inliers = std::move(refit_inliers);
    }
  }

  result.transform = best_transform;
  for (auto i : best_inliers) result.inliers.push_back(set[i]);
  result.status = LocalizationStatus::localized;
  return result;
}

}  // namespace nsm
