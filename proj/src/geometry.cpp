#include "scenegrasp/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "scenegrasp/errors.hpp"

namespace scenegrasp {

Aabb Aabb::of(std::span<const Vec3> points) {
  Aabb box;
  if (points.empty()) return box;
  box.min = box.max = points.front();
  for (const Vec3& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

Aabb Aabb::around(const Vec3& center, double half_extent) {
  const Vec3 h = Vec3::Constant(half_extent);
  return {center - h, center + h};
}

double Aabb::volume() const {
  const Vec3 e = extent();
  return std::max(0.0, e.x()) * std::max(0.0, e.y()) * std::max(0.0, e.z());
}

bool Aabb::contains(const Vec3& p) const {
  return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
}

bool Aabb::overlaps_xy(const Aabb& o) const {
  return min.x() <= o.max.x() && o.min.x() <= max.x() && min.y() <= o.max.y() &&
         o.min.y() <= max.y();
}

Aabb Aabb::intersect(const Aabb& o) const { return {min.cwiseMax(o.min), max.cwiseMin(o.max)}; }

double Aabb::distance_to(const Vec3& p) const {
  const Vec3 d = (min - p).cwiseMax(p - max).cwiseMax(Vec3::Zero());
  return d.norm();
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {}

RigidTransform RigidTransform::from_yaw(double yaw, const Vec3& t) { return {rotation_z(yaw), t}; }

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
  return {rotation_ * other.rotation_, rotation_ * other.translation_ + translation_};
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return {rt, -(rt * translation_)};
}

void RigidTransform::validate(double tol) const {
  if (!rotation_.allFinite() || !translation_.allFinite())
    throw ValidationError("rigid transform has non-finite entries");
  const double ortho = (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > tol) throw ValidationError("rotation is not orthonormal");
  if (std::abs(rotation_.determinant() - 1.0) > tol)
    throw ValidationError("rotation determinant is not +1");
}

Mat3 rotation_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 rotation_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 rotation_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

}  // namespace scenegrasp
