#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "nsm/core/error.hpp"
#include "nsm/core/geometry.hpp"
#include "nsm/core/log.hpp"
#include "nsm/core/parallel.hpp"
#include "nsm/core/segment_types.hpp"
#include "nsm/segmentation.hpp"

namespace nsm {

struct GestaltParams {
  double radius = 2.0;
  std::size_t radial_divisions = 4;
  std::size_t azimuthal_divisions = 8;

  void validate() const {
    if (!(radius > 0.0)) throw ValidationError("gestalt.radius must be > 0");
    if (radial_divisions < 1 || azimuthal_divisions < 1) throw ValidationError("gestalt divisions must be >= 1");
    if (radial_divisions * azimuthal_divisions != kGestaltBins) {
      throw ValidationError("gestalt radial_divisions * azimuthal_divisions must equal " + std::to_string(kGestaltBins) +
                            " (descriptor width is fixed at " + std::to_string(kDescriptorSize) + ")");
    }
  }
};

/// Eigenvalue ratio below which the horizontal spread counts as round.
inline constexpr double kIsotropyRatio = 1.05;
inline constexpr double kSkewTolerance = 1e-9;

struct EigenFeatures {
  double planarity = 0.0;       ///< lambda2 - lambda1 (ascending, normalized)
  double cylindricality = 0.0;  ///< lambda3 - lambda2
};

namespace detail {

/// Median of a copy; even counts average the two middle values.
inline double median(std::vector<double> values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline Eigen::Vector3d mean_of(std::span<const Point> pts) {
  Eigen::Vector3d m = Eigen::Vector3d::Zero();
  for (const auto& p : pts) m += p;
  return m / static_cast<double>(pts.size());
}

}  // namespace detail

/// Component-wise median of the points.
inline Eigen::Vector3d componentwise_median(std::span<const Point> pts) {
  if (pts.empty()) throw ValidationError("median of an empty point set");
  Eigen::Vector3d out;
  std::vector<double> buf(pts.size());
  for (int axis = 0; axis < 3; ++axis) {
    for (std::size_t i = 0; i < pts.size(); ++i) buf[i] = pts[i][axis];
    out[axis] = detail::median(buf);
  }
  return out;
}

/**
 * @brief Oriented key pose of a segment.
 *
 * Position is the component-wise median of all points. The z axis is global
 * up; x is the principal axis of the horizontal (x, y) covariance, with its
 * sign chosen so the third central moment of the projections is positive.
 * Symmetric distributions fall back to x.x > 0, then x.y > 0. Round
 * footprints (eigenvalue ratio < 1.05) get x = (1, 0, 0) and the isotropic
 * flag.
 */
inline KeyPose extract_keypose(std::span<const Point> pts) {
  if (pts.size() < 3) throw ValidationError("extract_keypose needs at least 3 points");
  KeyPose kp;
  kp.position = componentwise_median(pts);

  const double n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.x();
    my += p.y();
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : pts) {
    const double dx = p.x() - mx, dy = p.y() - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  sxx /= n;
  sxy /= n;
  syy /= n;

  // Closed-form eigen decomposition of the symmetric 2x2 covariance.
  const double half_trace = 0.5 * (sxx + syy);
  const double disc = std::sqrt(std::max(0.0, 0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy));
  const double lmax = half_trace + disc;
  const double lmin = std::max(0.0, half_trace - disc);

  Eigen::Vector2d axis(1.0, 0.0);
  if (!(lmax > 0.0) || lmax < kIsotropyRatio * lmin) {
    kp.isotropic = true;
  } else {
    // Eigenvector for lmax; pick the better-conditioned of the two forms.
    Eigen::Vector2d v = (sxx >= syy) ? Eigen::Vector2d(lmax - syy, sxy) : Eigen::Vector2d(sxy, lmax - sxx);
    axis = v.normalized();

    double skew = 0.0;
    for (const auto& p : pts) {
      const double d = (p.x() - mx) * axis.x() + (p.y() - my) * axis.y();
      skew += d * d * d;
    }
    skew /= n;
    bool flip = false;
    if (std::abs(skew) >= kSkewTolerance) {
      flip = skew < 0.0;
    } else if (std::abs(axis.x()) > 1e-12) {
      flip = axis.x() < 0.0;
    } else {
      flip = axis.y() < 0.0;
    }
    if (flip) axis = -axis;
  }

  const Eigen::Vector3d x(axis.x(), axis.y(), 0.0);
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  kp.orientation.col(0) = x;
  kp.orientation.col(1) = z.cross(x);
  kp.orientation.col(2) = z;
  return kp;
}

/**
 * Planarity and cylindricality from the point covariance. Eigenvalues are
 * normalized to sum to one and sorted ascending, so both features lie in
 * [0, 1] and their sum never exceeds one.
 */
inline EigenFeatures eigen_features(std::span<const Point> pts) {
  if (pts.size() < 3) throw ValidationError("eigen_features needs at least 3 points");
  const Eigen::Vector3d mean = detail::mean_of(pts);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector3d d = p - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(pts.size());

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov, Eigen::EigenvaluesOnly);
  Eigen::Vector3d ev = solver.eigenvalues().cwiseMax(0.0);  // ascending
  const double sum = ev.sum();
  if (!(sum > 1e-300)) {
    log_warn("eigen_features: degenerate covariance (coincident points); returning zeros");
    return {};
  }
  ev /= sum;
  return {ev[1] - ev[0], ev[2] - ev[1]};
}

/**
 * @brief Polar height-statistics block about the key pose, plus eigen features.
 *
 * Points are expressed in the key-pose frame. Ring = floor(r / (radius / rings)),
 * points at r >= radius are ignored. Sector counts clockwise from +x in steps of
 * 360 / sectors degrees. Each bin records the mean and population variance of
 * the local z; empty bins stay (0, 0).
 */
inline Descriptor gestalt_descriptor(std::span<const Point> pts, const KeyPose& kp, const GestaltParams& params) {
  params.validate();
  const std::size_t rings = params.radial_divisions;
  const std::size_t sectors = params.azimuthal_divisions;
  const double ring_width = params.radius / static_cast<double>(rings);
  const double sector_width = 2.0 * std::numbers::pi / static_cast<double>(sectors);
  const Eigen::Matrix3d to_local = kp.orientation.transpose();

  std::vector<std::size_t> bin_of(pts.size(), SIZE_MAX);
  std::vector<double> local_z(pts.size());
  std::array<std::size_t, kGestaltBins> count{};
  std::array<double, kGestaltBins> sum{};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Eigen::Vector3d local = to_local * (pts[i] - kp.position);
    const double r = std::hypot(local.x(), local.y());
    if (!(r < params.radius)) continue;
    double cw = -std::atan2(local.y(), local.x());
    if (cw < 0.0) cw += 2.0 * std::numbers::pi;
    const auto ring = std::min(rings - 1, static_cast<std::size_t>(r / ring_width));
    const auto sector = std::min(sectors - 1, static_cast<std::size_t>(cw / sector_width));
    const std::size_t bin = ring * sectors + sector;
    bin_of[i] = bin;
    local_z[i] = local.z();
    ++count[bin];
    sum[bin] += local.z();
  }

  Descriptor d;
  std::array<double, kGestaltBins> mean{};
  std::array<double, kGestaltBins> sq{};
  std::size_t used = 0;
  for (std::size_t b = 0; b < kGestaltBins; ++b) {
    if (count[b] > 0) mean[b] = sum[b] / static_cast<double>(count[b]);
    used += count[b];
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (bin_of[i] == SIZE_MAX) continue;
    const double dz = local_z[i] - mean[bin_of[i]];
    sq[bin_of[i]] += dz * dz;
  }
  for (std::size_t b = 0; b < kGestaltBins; ++b) {
    if (count[b] == 0) continue;
    d.values[2 * b] = mean[b];
    d.values[2 * b + 1] = sq[b] / static_cast<double>(count[b]);
  }
  if (used == 0 && !pts.empty()) log_warn("gestalt_descriptor: no points within the descriptor radius");

  // Tiny sets carry no shape; keep the gestalt block and zero the tail.
  const auto eig = pts.size() >= 3 ? eigen_features(pts) : EigenFeatures{};
  d.values[2 * kGestaltBins] = eig.planarity;
  d.values[2 * kGestaltBins + 1] = eig.cylindricality;
  return d;
}

inline DescribedSegment describe_segment(const Segment& segment, const GestaltParams& params) {
  const std::span<const Point> pts(segment.points.points);
  DescribedSegment out;
  out.id = segment.id;
  out.key_pose = extract_keypose(pts);
  out.descriptor = gestalt_descriptor(pts, out.key_pose, params);
  return out;
}

inline std::vector<DescribedSegment> describe_segments(std::span<const Segment> segments, const GestaltParams& params,
                                                       unsigned threads = 1) {
  params.validate();
  std::vector<DescribedSegment> out(segments.size());
  parallel_for(segments.size(), threads, [&](std::size_t i) { out[i] = describe_segment(segments[i], params); });
  return out;
}

}  // namespace nsm
