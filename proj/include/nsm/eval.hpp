#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsm/core/error.hpp"
#include "nsm/core/geometry.hpp"
#include "nsm/core/trajectory.hpp"
#include "nsm/registration.hpp"

namespace nsm {

struct PoseError {
  double e_t = 0.0;  ///< meters
  double e_r = 0.0;  ///< radians, [0, pi]
};

/// dT = T_e * T_c^-1; e_t = |dt|, e_r = arccos(clamp((tr(dR) - 1) / 2)).
inline PoseError pose_error(const RigidTransform& estimate, const RigidTransform& truth) {
  const RigidTransform delta = estimate * truth.inverse();
  const double c = std::clamp((delta.rotation().trace() - 1.0) / 2.0, -1.0, 1.0);
  return {delta.translation().norm(), std::acos(c)};
}

// ----------------------------------------------------------------------------
// ROC
// ----------------------------------------------------------------------------

struct ScoredPair {
  double score = 0.0;
  bool positive = false;
};

struct RocPoint {
  double threshold = 0.0;  ///< predicted positive iff score >= threshold
  double tpr = 0.0;
  double fpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  ///< starts at (+inf, 0, 0), thresholds descending
  double auc = 0.0;
  RocPoint operating_point;      ///< distinct-score point with FPR closest to the target
  double target_fpr = 0.1;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/**
 * Exact ROC over every distinct score, trapezoidal AUC. Tied scores move TPR
 * and FPR together, which counts each tied positive/negative pair as half.
 */
inline RocCurve roc(std::span<const ScoredPair> pairs, double target_fpr = 0.1) {
  RocCurve out;
  out.target_fpr = target_fpr;
  for (const auto& p : pairs) {
    if (!std::isfinite(p.score)) throw ValidationError("roc: non-finite score");
    (p.positive ? out.positives : out.negatives)++;
  }
  if (out.positives == 0 || out.negatives == 0) throw ValidationError("roc: both labels must be present");

  std::vector<ScoredPair> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end(), [](const ScoredPair& a, const ScoredPair& b) { return a.score > b.score; });
  const double np = static_cast<double>(out.positives), nn = static_cast<double>(out.negatives);

  out.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  double area = 0.0;
  bool have_operating = false;
  for (std::size_t i = 0; i < sorted.size();) {
    const double s = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == s; ++i) (sorted[i].positive ? tp : fp)++;
    const RocPoint point{s, static_cast<double>(tp) / np, static_cast<double>(fp) / nn};
    const RocPoint& prev = out.points.back();
    area += (point.fpr - prev.fpr) * (point.tpr + prev.tpr) / 2.0;
    out.points.push_back(point);
    if (!have_operating ||
        std::abs(point.fpr - target_fpr) < std::abs(out.operating_point.fpr - target_fpr)) {
      out.operating_point = point;
      have_operating = true;
    }
  }
  out.auc = area;
  return out;
}

inline std::string roc_to_csv(const RocCurve& curve) {
  std::string s = "threshold,tpr,fpr\n";
  for (const auto& p : curve.points) {
    s += (std::isinf(p.threshold) ? std::string("inf") : detail::format_double(p.threshold)) + ',' +
         detail::format_double(p.tpr) + ',' + detail::format_double(p.fpr) + '\n';
  }
  return s;
}

inline nlohmann::json to_json(const RocCurve& c) {
  return {{"auc", c.auc},
          {"positives", c.positives},
          {"negatives", c.negatives},
          {"target_fpr", c.target_fpr},
          {"operating_point", {{"threshold", c.operating_point.threshold}, {"tpr", c.operating_point.tpr}, {"fpr", c.operating_point.fpr}}}};
}

// ----------------------------------------------------------------------------
// Run summary
// ----------------------------------------------------------------------------

struct FrameResult {
  std::string frame_id;
  LocalizationStatus status = LocalizationStatus::insufficient_matches;
  RigidTransform transform;
};

struct ErrorStats {
  double rmse = 0.0;
  double std = 0.0;  ///< population standard deviation
  double mean = 0.0;
  double max = 0.0;
};

struct FrameError {
  std::string frame_id;
  PoseError error;
  bool false_localization = false;
};

struct RunReport {
  std::size_t frames = 0;  ///< ground-truth frames
  std::size_t results = 0;
  std::size_t localized = 0;
  std::size_t false_localizations = 0;  ///< localized with e_t above the limit
  double false_limit = 1.0;
  std::optional<ErrorStats> translation;  ///< meters; absent without localized frames
  std::optional<ErrorStats> rotation;     ///< radians
  std::vector<FrameError> per_frame;
};

inline ErrorStats error_stats(std::span<const double> values) {
  ErrorStats s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  double sum = 0.0, sq = 0.0;
  for (double v : values) {
    sum += v;
    sq += v * v;
    s.max = std::max(s.max, v);
  }
  s.mean = sum / n;
  s.rmse = std::sqrt(sq / n);
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / n);
  return s;
}

/**
 * Errors over localized frames only. Every result must name a frame present
 * in `gt`; frames without a result count as not localized.
 */
inline RunReport run_report(std::span<const FrameResult> results, std::span<const TrajectoryEntry> gt,
                            double false_limit = 1.0) {
  std::map<std::string, const RigidTransform*> truth;
  for (const auto& g : gt) {
    if (!truth.emplace(g.frame_id, &g.pose).second) throw ValidationError("run_report: duplicate gt frame '" + g.frame_id + "'");
  }
  RunReport r;
  r.frames = gt.size();
  r.results = results.size();
  r.false_limit = false_limit;
  std::vector<double> et, er;
  for (const auto& res : results) {
    const auto it = truth.find(res.frame_id);
    if (it == truth.end()) throw ValidationError("run_report: no ground truth for frame '" + res.frame_id + "'");
    if (res.status != LocalizationStatus::localized) continue;
    ++r.localized;
    const PoseError e = pose_error(res.transform, *it->second);
    const bool false_loc = e.e_t > false_limit;
    if (false_loc) ++r.false_localizations;
    r.per_frame.push_back({res.frame_id, e, false_loc});
    et.push_back(e.e_t);
    er.push_back(e.e_r);
  }
  if (!et.empty()) {
    r.translation = error_stats(et);
    r.rotation = error_stats(er);
  }
  return r;
}

inline nlohmann::json to_json(const RunReport& r) {
  auto stats = [](const std::optional<ErrorStats>& s) -> nlohmann::json {
    if (!s) return nullptr;
    return {{"rmse", s->rmse}, {"std", s->std}, {"mean", s->mean}, {"max", s->max}};
  };
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : r.per_frame) {
    frames.push_back({{"frame_id", f.frame_id}, {"e_t", f.error.e_t}, {"e_r", f.error.e_r}, {"false_localization", f.false_localization}});
  }
  return {{"frames", r.frames},
          {"results", r.results},
          {"localized", r.localized},
          {"false_localizations", r.false_localizations},
          {"false_localization_limit_m", r.false_limit},
          {"translation_m", stats(r.translation)},
          {"rotation_rad", stats(r.rotation)},
          {"per_frame", frames}};
}

}  // namespace nsm
