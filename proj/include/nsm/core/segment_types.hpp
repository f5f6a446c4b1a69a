#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Core>

#include "nsm/core/geometry.hpp"

namespace nsm {

inline constexpr std::size_t kGestaltBins = 32;
inline constexpr std::size_t kDescriptorSize = 2 * kGestaltBins + 2;  // 66

/**
 * Hybrid segment descriptor, laid out as
 * [bin0.mean, bin0.var, ..., bin31.mean, bin31.var, planarity, cylindricality].
 */
struct Descriptor {
  std::array<double, kDescriptorSize> values{};

  static constexpr std::size_t size() { return kDescriptorSize; }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  std::span<const double> span() const { return values; }

  double bin_mean(std::size_t bin) const { return values[2 * bin]; }
  double bin_variance(std::size_t bin) const { return values[2 * bin + 1]; }
  double planarity() const { return values[2 * kGestaltBins]; }
  double cylindricality() const { return values[2 * kGestaltBins + 1]; }

  bool operator==(const Descriptor&) const = default;
};

/// Oriented anchor of a segment: z column is global up, x from horizontal PCA.
struct KeyPose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();
  /// Horizontal spread was too round to pick a principal axis; x fell back to (1,0,0).
  bool isotropic = false;

  RigidTransform as_transform() const { return RigidTransform(orientation, position); }

  KeyPose transformed(const RigidTransform& t) const {
    return {t.apply(position), t.rotation() * orientation, isotropic};
  }

  bool operator==(const KeyPose& o) const {
    return position == o.position && orientation == o.orientation && isotropic == o.isotropic;
  }
};

/// A segment after key-pose extraction and description.
struct DescribedSegment {
  std::uint32_t id = 0;
  KeyPose key_pose;
  Descriptor descriptor;
};

}  // namespace nsm
