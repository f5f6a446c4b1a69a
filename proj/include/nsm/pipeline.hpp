#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nsm/config.hpp"
#include "nsm/core/segment_map.hpp"
#include "nsm/features.hpp"
#include "nsm/forest.hpp"
#include "nsm/ground_filter.hpp"
#include "nsm/matching.hpp"
#include "nsm/registration.hpp"
#include "nsm/segmentation.hpp"

namespace nsm {

/// Stage parameters resolved from a PipelineConfig.
struct PipelineParams {
  PmfParams pmf;
  SegmentationParams segmentation;
  GestaltParams gestalt;
  MatchParams matching;
  ConsistencyParams consistency;
  RansacParams ransac;
  unsigned threads = 1;
  bool remove_ground = true;

  static PipelineParams from(const PipelineConfig& cfg) {
    cfg.validate();
    PipelineParams p;
    p.pmf = cfg.pmf;
    p.segmentation = cfg.segmentation;
    p.gestalt = cfg.gestalt;
    p.matching = cfg.matching;
    p.matching.threads = cfg.threads;
    p.consistency = cfg.registration.consistency();
    p.ransac = cfg.registration.ransac(cfg.seed);
    p.threads = cfg.threads;
    return p;
  }
};

struct FeatureExtraction {
  std::size_t input_points = 0;
  std::size_t ground_points = 0;
  std::vector<Segment> segments;
  std::vector<DescribedSegment> described;
};

/// Ground removal, clustering and description of one cloud.
inline FeatureExtraction extract_features(const PointCloud& cloud, const PipelineParams& params) {
  FeatureExtraction out;
  out.input_points = cloud.size();
  if (cloud.empty()) return out;
  if (params.remove_ground) {
    const GroundLabeling labels = filter_ground(cloud, params.pmf);
    out.ground_points = labels.ground_count();
    out.segments = euclidean_cluster(labels.non_ground, params.segmentation);
  } else {
    out.segments = euclidean_cluster(cloud, params.segmentation);
  }
  out.described = describe_segments(out.segments, params.gestalt, params.threads);
  return out;
}

/// Map entries from described segments; segment points are stored as the payload.
inline SegmentMap make_map(const FeatureExtraction& features, const std::string& frame_id, const PipelineConfig& cfg) {
  SegmentMap map;
  map.frame_id = frame_id;
  map.fingerprint = cfg.fingerprint();
  map.params = cfg.map_params_json();
  for (std::size_t i = 0; i < features.described.size(); ++i) {
    const auto& d = features.described[i];
    map.entries.push_back({d.id, d.key_pose, d.descriptor, features.segments[i].points.points});
  }
  return map;
}

inline SegmentMap build_map(const PointCloud& cloud, const PipelineConfig& cfg) {
  return make_map(extract_features(cloud, PipelineParams::from(cfg)), cloud.frame_id, cfg);
}

/// Accepted candidates as key-pose correspondences.
inline CorrespondenceSet to_correspondences(std::span<const MatchCandidate> candidates,
                                            std::span<const DescribedSegment> source, const SegmentMap& map) {
  std::map<std::uint32_t, const KeyPose*> src, tgt;
  for (const auto& s : source) src[s.id] = &s.key_pose;
  for (const auto& e : map.entries) tgt[e.segment_id] = &e.key_pose;
  CorrespondenceSet out;
  for (const auto& c : candidates) {
    if (!c.accepted) continue;
    out.push_back({c.source_segment_id, c.target_segment_id, *src.at(c.source_segment_id), *tgt.at(c.target_segment_id), c.rf_score});
  }
  return out;
}

struct LocalizationTrace {
  LocalizationResult result;
  FeatureExtraction features;
  std::vector<MatchCandidate> candidates;
};

/**
 * @brief Ground filter, segmentation, description, matching, consistency
 * grouping and RANSAC, in that order. The status names the first stage that
 * came up short.
 */
inline LocalizationTrace localize_traced(const PointCloud& source, const SegmentMap& map, const ForestModel& model,
                                         const PipelineParams& params) {
  LocalizationTrace trace;
  if (map.empty()) throw PipelineError("localize: map has no segments");
  trace.features = extract_features(source, params);
  LocalizationResult& r = trace.result;
  r.source_segments = trace.features.described.size();
  if (trace.features.described.empty()) {
    r.status = LocalizationStatus::insufficient_matches;
    return trace;
  }
  trace.candidates = match_segments(trace.features.described, map, model, params.matching);
  r.candidates = trace.candidates.size();
  const CorrespondenceSet accepted = to_correspondences(trace.candidates, trace.features.described, map);
  r.accepted_matches = accepted.size();

  const ConsistencyResult grouped = consistency_filter(accepted, params.consistency);
  r.consistency_cluster_size = grouped.largest_cluster;
  if (grouped.status != LocalizationStatus::localized) {
    r.status = grouped.status;
    return trace;
  }
  LocalizationResult pose = estimate_pose(grouped.cluster, params.ransac);
  r.status = pose.status;
  r.transform = pose.transform;
  r.inliers = std::move(pose.inliers);
  return trace;
}

inline LocalizationResult localize(const PointCloud& source, const SegmentMap& map, const ForestModel& model,
                                   const PipelineParams& params) {
  return localize_traced(source, map, model, params).result;
}

inline nlohmann::json to_json(const LocalizationResult& r, const std::string& frame_id) {
  const auto q = r.transform.quaternion();
  const auto& t = r.transform.translation();
  nlohmann::json inliers = nlohmann::json::array();
  for (const auto& c : r.inliers) {
    inliers.push_back({{"source_id", c.source_id},
                       {"target_id", c.target_id},
                       {"weight", c.weight},
                       {"source", {c.source.position.x(), c.source.position.y(), c.source.position.z()}},
                       {"target", {c.target.position.x(), c.target.position.y(), c.target.position.z()}}});
  }
  return {{"frame_id", frame_id},
          {"status", std::string(to_string(r.status))},
          {"transform", {{"quaternion", {{"x", q.x()}, {"y", q.y()}, {"z", q.z()}, {"w", q.w()}}}, {"translation", {t.x(), t.y(), t.z()}}}},
          {"inliers", inliers},
          {"consistency_cluster_size", r.consistency_cluster_size},
          {"source_segments", r.source_segments},
          {"candidates", r.candidates},
          {"accepted_matches", r.accepted_matches}};
}

/// Reads the status and transform of a result.json document.
inline std::pair<LocalizationStatus, RigidTransform> result_from_json(const nlohmann::json& j) {
  try {
    const auto status = parse_status(j.at("status").get<std::string>());
    const auto& tr = j.at("transform");
    const auto& q = tr.at("quaternion");
    const auto& t = tr.at("translation");
    const Eigen::Quaterniond quat(q.at("w").get<double>(), q.at("x").get<double>(), q.at("y").get<double>(), q.at("z").get<double>());
    return {status, RigidTransform::from_quaternion(quat, {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()})};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed result document: ") + e.what());
  }
}

}  // namespace nsm
