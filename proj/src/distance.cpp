#include "scenegrasp/distance.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "scenegrasp/errors.hpp"

namespace scenegrasp {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  return (p - closest_point_on_triangle(p, a, b, c)).norm();
}

namespace {

constexpr double kGrazeTol = 1e-9;

enum class RayHit { Miss, Hit, Graze };

// Möller–Trumbore; a hit whose barycentrics lie within kGrazeTol of an edge
// is reported as a graze because parity is ambiguous there.
RayHit cast(const Vec3& o, const Vec3& dir, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 pv = dir.cross(e2);
  const double det = e1.dot(pv);
  const double scale = e1.norm() * e2.norm();
  if (std::abs(det) <= 1e-14 * scale) return RayHit::Miss;  // parallel to the plane
  const double inv = 1.0 / det;
  const Vec3 tv = o - a;
  const double u = tv.dot(pv) * inv;
  if (u < -kGrazeTol || u > 1 + kGrazeTol) return RayHit::Miss;
  const Vec3 qv = tv.cross(e1);
  const double v = dir.dot(qv) * inv;
  if (v < -kGrazeTol || u + v > 1 + kGrazeTol) return RayHit::Miss;
  const double t = e2.dot(qv) * inv;
  if (t <= 0) return RayHit::Miss;
  if (u < kGrazeTol || v < kGrazeTol || u + v > 1 - kGrazeTol) return RayHit::Graze;
  return RayHit::Hit;
}

// Fixed pseudo-random fallback directions (kept constant for determinism).
const std::array<Vec3, 3> kRays = {
    Vec3(1.0, 0.0, 0.0),
    Vec3(0.5377, 1.8339, -2.2588).normalized(),
    Vec3(0.8622, 0.3188, -1.3077).normalized(),
};

}  // namespace

MeshDistance::MeshDistance(const TriMesh& mesh)
    : bounds_(mesh.bounds()), watertight_(mesh.is_watertight()) {
  tris_.reserve(mesh.faces.size());
  for (const Face& f : mesh.faces)
    tris_.push_back({mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]});
}

double MeshDistance::unsigned_distance(const Vec3& p) const {
  if (!p.allFinite()) throw Error("distance query with non-finite point");
  if (tris_.empty()) throw Error("distance query against a mesh without faces");
  double best = std::numeric_limits<double>::infinity();
  for (const Tri& t : tris_) {
    const double d2 = (p - closest_point_on_triangle(p, t.a, t.b, t.c)).squaredNorm();
    best = std::min(best, d2);
  }
  return std::sqrt(best);
}

bool MeshDistance::inside(const Vec3& p) const {
  if (!bounds_.contains(p)) return false;
  auto parity = [&](const Vec3& dir, bool& grazed) {
    int crossings = 0;
    grazed = false;
    for (const Tri& t : tris_) {
      switch (cast(p, dir, t.a, t.b, t.c)) {
        case RayHit::Hit: ++crossings; break;
        case RayHit::Graze: grazed = true; ++crossings; break;
        case RayHit::Miss: break;
      }
    }
    return (crossings % 2) == 1;
  };
  bool grazed = false;
  const bool primary = parity(kRays[0], grazed);
  if (!grazed) return primary;
  int votes = primary ? 1 : 0;
  for (std::size_t r = 1; r < kRays.size(); ++r) {
    bool g = false;
    votes += parity(kRays[r], g) ? 1 : 0;
  }
  return votes >= 2;
}

SignedDistance MeshDistance::signed_distance(const Vec3& p) const {
  const double d = unsigned_distance(p);
  if (d == 0.0) return {0.0, watertight_};
  return {inside(p) ? -d : d, watertight_};
}

SignedDistance signed_distance(const TriMesh& mesh, const Vec3& point) {
  return MeshDistance(mesh).signed_distance(point);
}

}  // namespace scenegrasp
