#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsm/core/error.hpp"
#include "nsm/core/geometry.hpp"
#include "nsm/core/kdtree.hpp"
#include "nsm/core/parallel.hpp"
#include "nsm/core/segment_map.hpp"
#include "nsm/core/segment_types.hpp"
#include "nsm/forest.hpp"

namespace nsm {

inline constexpr std::size_t kPairFeatureSize = 3 * kDescriptorSize;  // 198

using PairFeature = std::array<double, kPairFeatureSize>;

/// [|f_s| , |f_t| , |f_s - f_t|], all element-wise.
inline PairFeature build_pair_feature(const Descriptor& source, const Descriptor& target) {
  PairFeature out{};
  for (std::size_t i = 0; i < kDescriptorSize; ++i) {
    out[i] = std::abs(source[i]);
    out[kDescriptorSize + i] = std::abs(target[i]);
    out[2 * kDescriptorSize + i] = std::abs(source[i] - target[i]);
  }
  return out;
}

/// Span overload for callers holding raw vectors; both must be 66 wide.
inline PairFeature build_pair_feature(std::span<const double> source, std::span<const double> target) {
  if (source.size() != kDescriptorSize || target.size() != kDescriptorSize) {
    throw ValidationError("build_pair_feature: descriptors must have " + std::to_string(kDescriptorSize) + " entries");
  }
  Descriptor s, t;
  std::copy(source.begin(), source.end(), s.values.begin());
  std::copy(target.begin(), target.end(), t.values.begin());
  return build_pair_feature(s, t);
}

struct MatchParams {
  std::size_t k_neighbours = 200;
  double rf_threshold = 0.69;
  /// Scale each descriptor dimension by its spread over the map for the k-NN stage only.
  bool standardize = false;
  unsigned threads = 1;

  void validate() const {
    if (k_neighbours < 1) throw ValidationError("matching.k_neighbours must be >= 1");
    if (!(rf_threshold >= 0.0 && rf_threshold <= 1.0)) throw ValidationError("matching.rf_threshold must be in [0, 1]");
  }
};

struct MatchCandidate {
  std::uint32_t source_segment_id = 0;
  std::uint32_t target_segment_id = 0;
  double l2_distance = 0.0;  ///< raw descriptor distance
  double rf_score = 0.0;
  bool accepted = false;
};

namespace detail {

inline std::vector<double> descriptor_scales(const SegmentMap& map, bool standardize) {
  std::vector<double> scale(kDescriptorSize, 1.0);
  if (!standardize || map.size() < 2) return scale;
  for (std::size_t d = 0; d < kDescriptorSize; ++d) {
    double mean = 0.0;
    for (const auto& e : map.entries) mean += e.descriptor[d];
    mean /= static_cast<double>(map.size());
    double var = 0.0;
    for (const auto& e : map.entries) var += (e.descriptor[d] - mean) * (e.descriptor[d] - mean);
    const double sd = std::sqrt(var / static_cast<double>(map.size()));
    scale[d] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
  return scale;
}

}  // namespace detail

/**
 * @brief k-NN retrieval in descriptor space followed by Random Forest gating.
 *
 * Every source segment gets min(K, |map|) candidates; each is scored on its
 * pair feature and accepted iff score >= rf_threshold. Output is sorted by
 * score descending, then source id, distance and target id.
 */
inline std::vector<MatchCandidate> match_segments(std::span<const DescribedSegment> source, const SegmentMap& target,
                                                  const ForestModel& model, const MatchParams& params) {
  params.validate();
  if (target.empty()) throw ValidationError("match_segments: target map is empty");
  if (model.width != kPairFeatureSize) {
    throw ValidationError("match_segments: model width " + std::to_string(model.width) + " != " +
                          std::to_string(kPairFeatureSize));
  }

  const auto scale = detail::descriptor_scales(target, params.standardize);
  std::vector<double> rows;
  rows.reserve(target.size() * kDescriptorSize);
  for (const auto& e : target.entries)
    for (std::size_t d = 0; d < kDescriptorSize; ++d) rows.push_back(e.descriptor[d] * scale[d]);
  const KdTree index(std::move(rows), kDescriptorSize);

  std::vector<std::vector<MatchCandidate>> per_source(source.size());
  parallel_for(source.size(), params.threads, [&](std::size_t i) {
    const auto& s = source[i];
    std::array<double, kDescriptorSize> query{};
    for (std::size_t d = 0; d < kDescriptorSize; ++d) query[d] = s.descriptor[d] * scale[d];
    for (const auto& nb : index.knn(query, params.k_neighbours)) {
      const auto& t = target.entries[nb.id];
      MatchCandidate c;
      c.source_segment_id = s.id;
      c.target_segment_id = t.segment_id;
      double d2 = 0.0;
      for (std::size_t d = 0; d < kDescriptorSize; ++d) d2 += (s.descriptor[d] - t.descriptor[d]) * (s.descriptor[d] - t.descriptor[d]);
      c.l2_distance = std::sqrt(d2);
      c.rf_score = rf_score(model, build_pair_feature(s.descriptor, t.descriptor));
      c.accepted = c.rf_score >= params.rf_threshold;
      per_source[i].push_back(c);
    }
  });

  std::vector<MatchCandidate> out;
  for (auto& v : per_source) out.insert(out.end(), v.begin(), v.end());
  std::sort(out.begin(), out.end(), [](const MatchCandidate& a, const MatchCandidate& b) {
    if (a.rf_score != b.rf_score) return a.rf_score > b.rf_score;
    if (a.source_segment_id != b.source_segment_id) return a.source_segment_id < b.source_segment_id;
    if (a.l2_distance != b.l2_distance) return a.l2_distance < b.l2_distance;
    return a.target_segment_id < b.target_segment_id;
  });
  return out;
}

// ============================================================================
// Ground-truth labelling
// ============================================================================

struct LabeledKeyPose {
  std::uint32_t id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

struct LabeledPair {
  std::uint32_t source_id = 0;
  std::uint32_t target_id = 0;
  double distance = 0.0;  ///< ||T_gt * k_s - k_t||
  bool positive = false;
};

/// Default true-match radius, meters.
inline constexpr double kTrueMatchRadius = 0.5;

/// All source x target pairs; positive iff ||gt * k_s - k_t|| < radius (strict).
inline std::vector<LabeledPair> label_pairs(std::span<const LabeledKeyPose> source, std::span<const LabeledKeyPose> target,
                                            const RigidTransform& gt, double radius = kTrueMatchRadius) {
  std::vector<LabeledPair> out;
  out.reserve(source.size() * target.size());
  for (const auto& s : source) {
    const Eigen::Vector3d moved = gt.apply(s.position);
    for (const auto& t : target) {
      const double d = (moved - t.position).norm();
      out.push_back({s.id, t.id, d, d < radius});
    }
  }
  return out;
}

/**
 * Training rows for the match classifier: every source segment paired with its
 * k nearest map descriptors, labelled by the key-pose distance rule.
 */
inline TrainingSet make_training_pairs(std::span<const DescribedSegment> source, const SegmentMap& target,
                                       const RigidTransform& gt, std::size_t k, double radius = kTrueMatchRadius) {
  TrainingSet set(kPairFeatureSize);
  if (target.empty() || source.empty()) return set;
  std::vector<double> rows;
  rows.reserve(target.size() * kDescriptorSize);
  for (const auto& e : target.entries) rows.insert(rows.end(), e.descriptor.values.begin(), e.descriptor.values.end());
  const KdTree index(std::move(rows), kDescriptorSize);
  for (const auto& s : source) {
    const Eigen::Vector3d moved = gt.apply(s.key_pose.position);
    for (const auto& nb : index.knn(s.descriptor.span(), k)) {
      const auto& t = target.entries[nb.id];
      const bool positive = (moved - t.key_pose.position).norm() < radius;
      set.add(build_pair_feature(s.descriptor, t.descriptor), positive);
    }
  }
  return set;
}

}  // namespace nsm
