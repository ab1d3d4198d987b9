#pragma once

// Brute-force reference computations for the tests. They deliberately use
// different algorithms from the library (polygon clipping instead of
// separating axes, plane projection instead of Voronoi regions, a -z ray
// instead of +x) so a shared mistake is unlikely.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "scenegrasp/geometry.hpp"
#include "scenegrasp/mesh.hpp"
#include "scenegrasp/voxel_grid.hpp"

namespace oracle {

using scenegrasp::Aabb;
using scenegrasp::TriMesh;
using scenegrasp::Vec3;
using scenegrasp::VoxelGrid;

struct Nearest {
  std::uint32_t index = 0;
  double distance = 0.0;
};

inline Nearest nearest(const std::vector<Vec3>& pts, const Vec3& q) {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (std::uint32_t i = 0; i < pts.size(); ++i) {
    const double d = (pts[i] - q).norm();
    if (d < best.distance) best = {i, d};
  }
  return best;
}

inline std::vector<std::uint32_t> within(const std::vector<Vec3>& pts, const Vec3& q, double r) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < pts.size(); ++i)
    if ((pts[i] - q).norm() <= r) out.push_back(i);
  return out;
}

inline double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// Plane projection when the foot lands inside, else the nearest edge.
inline double triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double nn = n.squaredNorm();
  if (nn > 0) {
    const Vec3 foot = p - n * ((p - a).dot(n) / nn);
    const bool in = n.dot((b - a).cross(foot - a)) >= 0 && n.dot((c - b).cross(foot - b)) >= 0 &&
                    n.dot((a - c).cross(foot - c)) >= 0;
    if (in) return (p - foot).norm();
  }
  return std::min({segment_distance(p, a, b), segment_distance(p, b, c), segment_distance(p, c, a)});
}

inline double mesh_distance(const TriMesh& m, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : m.faces)
    best = std::min(best, triangle_distance(p, m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]));
  return best;
}

// Crossings of a ray from p along -z (Möller–Trumbore), for meshes where
// the tests keep queries away from edges.
inline bool inside_by_parity(const TriMesh& m, const Vec3& p) {
  const Vec3 dir(0.0137, -0.0071, -1.0);
  int hits = 0;
  for (const auto& f : m.faces) {
    const Vec3& a = m.vertices[f[0]];
    const Vec3 e1 = m.vertices[f[1]] - a, e2 = m.vertices[f[2]] - a;
    const Vec3 h = dir.cross(e2);
    const double det = e1.dot(h);
    if (std::abs(det) < 1e-14) continue;
    const Vec3 s = p - a;
    const double u = s.dot(h) / det;
    if (u < 0 || u > 1) continue;
    const Vec3 q = s.cross(e1);
    const double v = dir.dot(q) / det;
    if (v < 0 || u + v > 1) continue;
    if (e2.dot(q) / det > 0) ++hits;
  }
  return hits % 2 == 1;
}

// Convex closed mesh: inside iff behind every face plane.
inline bool inside_convex(const TriMesh& m, const Vec3& p) {
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const Vec3& a = m.vertices[m.faces[f][0]];
    const Vec3 n = (m.vertices[m.faces[f][1]] - a).cross(m.vertices[m.faces[f][2]] - a);
    if (n.dot(p - a) >= 0) return false;
  }
  return true;
}

// Sutherland–Hodgman clip of the triangle against the closed box; the
// triangle touches the box iff something survives.
inline bool triangle_touches_box(const Vec3& a, const Vec3& b, const Vec3& c, const Aabb& box) {
  std::vector<Vec3> poly = {a, b, c};
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      const double bound = side == 0 ? box.min[axis] : box.max[axis];
      auto keep = [&](const Vec3& p) { return side == 0 ? p[axis] >= bound : p[axis] <= bound; };
      std::vector<Vec3> out;
      for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec3& cur = poly[i];
        const Vec3& nxt = poly[(i + 1) % poly.size()];
        const bool kc = keep(cur), kn = keep(nxt);
        if (kc) out.push_back(cur);
        if (kc != kn) {
          const double t = (bound - cur[axis]) / (nxt[axis] - cur[axis]);
          Vec3 x = cur + t * (nxt - cur);
          x[axis] = bound;
          out.push_back(x);
        }
      }
      poly = std::move(out);
      if (poly.empty()) return false;
    }
  }
  return true;
}

inline std::vector<std::uint8_t> voxelize(const TriMesh& m, const VoxelGrid& shape) {
  const auto& d = shape.dims();
  std::vector<std::uint8_t> cells(shape.cell_count(), 0);
  for (int k = 0; k < d[2]; ++k)
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i) {
        const Aabb box = shape.cell_bounds(i, j, k);
        for (const auto& f : m.faces)
          if (triangle_touches_box(m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]], box)) {
            cells[shape.linear(i, j, k)] = 1;
            break;
          }
      }
  return cells;
}

inline std::vector<std::uint8_t> column_fill(const VoxelGrid& g) {
  const auto& d = g.dims();
  std::vector<std::uint8_t> cells(g.cell_count(), 0);
  for (int i = 0; i < d[0]; ++i)
    for (int j = 0; j < d[1]; ++j)
      for (int k = 0; k < d[2]; ++k) {
        bool any = false;
        for (int kk = k; kk < d[2] && !any; ++kk) any = g.occupied(i, j, kk);
        cells[g.linear(i, j, k)] = any ? 1 : 0;
      }
  return cells;
}

inline std::optional<std::array<long long, 3>> cell(const VoxelGrid& g, const Vec3& p) {
  std::array<long long, 3> c{};
  for (int a = 0; a < 3; ++a) {
    c[a] = static_cast<long long>(std::floor((p[a] - g.origin()[a]) / g.voxel_size()));
    if (c[a] < 0 || c[a] >= g.dims()[a]) return std::nullopt;
  }
  return c;
}

inline bool occupied(const VoxelGrid& g, const Vec3& p) {
  const auto c = cell(g, p);
  return c && g.occupied(static_cast<int>((*c)[0]), static_cast<int>((*c)[1]),
                         static_cast<int>((*c)[2]));
}

}  // namespace oracle
