#pragma once

#include <span>
#include <vector>

#include "scenegrasp/mesh.hpp"

namespace scenegrasp {

/// Closest point on triangle (a, b, c) to p (Voronoi-region walk).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

struct SignedDistance {
  double value = 0.0;  ///< meters, negative inside
  /// False when the mesh is not watertight; the magnitude is still exact
  /// but the sign is a best-effort parity guess.
  bool sign_valid = true;
};

/// Point-to-surface distance queries against one mesh. Construction caches
/// triangle corners, bounds and watertightness; queries are const and
/// thread-safe.
class MeshDistance {
 public:
  explicit MeshDistance(const TriMesh& mesh);

  bool watertight() const { return watertight_; }
  std::size_t triangle_count() const { return tris_.size(); }
  const Aabb& bounds() const { return bounds_; }

  /// Minimum distance to any triangle. Throws Error for NaN input or an
  /// empty mesh.
  double unsigned_distance(const Vec3& p) const;

  /// |value| is the unsigned distance; the sign comes from ray-crossing
  /// parity along +x, with two fixed fallback rays and a majority vote when
  /// the primary ray passes within 1e-9 of a triangle edge or vertex.
  SignedDistance signed_distance(const Vec3& p) const;

  /// Ray-parity inside test on its own (same fallback rule).
  bool inside(const Vec3& p) const;

 private:
  struct Tri {
    Vec3 a, b, c;
  };
  std::vector<Tri> tris_;
  Aabb bounds_;
  bool watertight_ = false;
};

/// Convenience wrapper; builds a MeshDistance per call.
SignedDistance signed_distance(const TriMesh& mesh, const Vec3& point);

}  // namespace scenegrasp
