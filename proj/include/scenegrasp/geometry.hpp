#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace scenegrasp {

// All coordinates are meters, z-up, floor at z = 0.
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  static Aabb of(std::span<const Vec3> points);
  static Aabb around(const Vec3& center, double half_extent);

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  double volume() const;
  bool contains(const Vec3& p) const;
  bool overlaps_xy(const Aabb& other) const;
  /// Closed-interval intersection; empty result when disjoint is signalled
  /// by a non-positive extent on some axis.
  Aabb intersect(const Aabb& other) const;
  double distance_to(const Vec3& p) const;
};

class RigidTransform {
 public:
  RigidTransform() = default;
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform translation_only(const Vec3& t) { return {Mat3::Identity(), t}; }
  /// Rotation about +z by `yaw` radians followed by translation `t`.
  static RigidTransform from_yaw(double yaw, const Vec3& t);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  /// (this ∘ other)(p) = this(other(p))
  RigidTransform compose(const RigidTransform& other) const;
  RigidTransform inverse() const;

  /// Throws ValidationError unless RᵀR = I and det R = +1 within `tol`.
  void validate(double tol = 1e-9) const;

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

Mat3 rotation_x(double angle);
Mat3 rotation_y(double angle);
Mat3 rotation_z(double angle);

}  // namespace scenegrasp
