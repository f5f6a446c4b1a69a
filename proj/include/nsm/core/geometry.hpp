#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "nsm/core/error.hpp"

namespace nsm {

/// 3-D sample in meters; right-handed frame with z = global up.
using Point = Eigen::Vector3d;

inline bool is_finite(const Point& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

struct PointCloud {
  std::vector<Point> points;
  std::string frame_id;

  PointCloud() = default;
  explicit PointCloud(std::vector<Point> pts, std::string frame = {})
      : points(std::move(pts)), frame_id(std::move(frame)) {}

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const Point& operator[](std::size_t i) const { return points[i]; }
  Point& operator[](std::size_t i) { return points[i]; }
  auto begin() const { return points.begin(); }
  auto end() const { return points.end(); }
};

/**
 * @brief Proper rigid motion x -> R x + t.
 *
 * Construction from raw parts validates orthonormality and det(R) = +1
 * within 1e-9. Products and inverses of valid transforms skip the check;
 * they stay on the manifold to within accumulated rounding.
 */
class RigidTransform {
 public:
  static constexpr double kTolerance = 1e-9;

  RigidTransform() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}

  RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
      : rotation_(rotation), translation_(translation) {
    if (!is_rotation(rotation_)) {
      throw ValidationError("RigidTransform: rotation is not orthonormal with det +1");
    }
    if (!translation_.allFinite()) throw ValidationError("RigidTransform: non-finite translation");
  }

  static RigidTransform identity() { return {}; }

  /// Quaternion is normalized first; a zero quaternion is rejected.
  static RigidTransform from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t) {
    const double n = q.norm();
    if (!(n > 1e-12) || !std::isfinite(n)) throw ValidationError("RigidTransform: degenerate quaternion");
    return RigidTransform(q.normalized().toRotationMatrix(), t);
  }

  static RigidTransform from_yaw(double yaw, const Eigen::Vector3d& t = Eigen::Vector3d::Zero()) {
    return RigidTransform(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix(), t);
  }

  /// R = Rz(yaw) * Ry(pitch) * Rx(roll).
  static RigidTransform from_rpy(double roll, double pitch, double yaw, const Eigen::Vector3d& t) {
    const Eigen::Matrix3d r = (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
                               Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
                               Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
                                  .toRotationMatrix();
    return RigidTransform(r, t);
  }

  static bool is_rotation(const Eigen::Matrix3d& r, double tol = kTolerance) {
    if (!r.allFinite()) return false;
    const double drift = ((r.transpose() * r) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    return drift <= tol && std::abs(r.determinant() - 1.0) <= tol;
  }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Quaterniond quaternion() const { return Eigen::Quaterniond(rotation_).normalized(); }

  Point apply(const Point& p) const { return rotation_ * p + translation_; }
  Point operator*(const Point& p) const { return apply(p); }

  PointCloud apply(const PointCloud& cloud) const {
    PointCloud out;
    out.frame_id = cloud.frame_id;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) out.points.push_back(apply(p));
    return out;
  }

  /// (a * b)(p) == a(b(p)).
  RigidTransform operator*(const RigidTransform& other) const {
    return RigidTransform(Unchecked{}, rotation_ * other.rotation_, rotation_ * other.translation_ + translation_);
  }

  RigidTransform inverse() const {
    const Eigen::Matrix3d rt = rotation_.transpose();
    return RigidTransform(Unchecked{}, rt, -(rt * translation_));
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation_;
    m.topRightCorner<3, 1>() = translation_;
    return m;
  }

  bool operator==(const RigidTransform& o) const {
    return rotation_ == o.rotation_ && translation_ == o.translation_;
  }

 private:
  struct Unchecked {};
  RigidTransform(Unchecked, const Eigen::Matrix3d& r, const Eigen::Vector3d& t) : rotation_(r), translation_(t) {}

  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

}  // namespace nsm
