#include "scenegrasp/shapes.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace scenegrasp::shapes {

TriMesh box(const Vec3& lo, const Vec3& hi, int label) {
  TriMesh m;
  for (int k = 0; k < 8; ++k)
    m.vertices.emplace_back((k & 1) ? hi.x() : lo.x(), (k & 2) ? hi.y() : lo.y(),
                            (k & 4) ? hi.z() : lo.z());
  // Outward winding.
  m.faces = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
             {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  if (label != kUnlabeled) m.face_labels.assign(m.faces.size(), label);
  return m;
}

namespace {
int steps_for(double extent, double step) {
  return std::max(1, static_cast<int>(std::ceil(extent / step - 1e-9)));
}
}  // namespace

TriMesh height_field(double x0, double y0, double x1, double y1, double step,
                     const std::function<double(double, double)>& height, int label) {
  TriMesh m;
  const int nx = steps_for(x1 - x0, step), ny = steps_for(y1 - y0, step);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double x = x0 + (x1 - x0) * i / nx, y = y0 + (y1 - y0) * j / ny;
      m.vertices.emplace_back(x, y, height(x, y));
    }
  auto id = [nx](int i, int j) { return static_cast<std::uint32_t>(j * (nx + 1) + i); };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      m.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  if (label != kUnlabeled) m.face_labels.assign(m.faces.size(), label);
  return m;
}

TriMesh block(double x0, double y0, double x1, double y1, double bottom, double top, double step,
              int label) {
  TriMesh m = height_field(x0, y0, x1, y1, step, [top](double, double) { return top; });
  const int nx = steps_for(x1 - x0, step), ny = steps_for(y1 - y0, step);
  auto top_id = [nx](int i, int j) { return static_cast<std::uint32_t>(j * (nx + 1) + i); };
  // Border loop of the top grid, counter-clockwise seen from above.
  std::vector<std::uint32_t> ring;
  for (int i = 0; i < nx; ++i) ring.push_back(top_id(i, 0));
  for (int j = 0; j < ny; ++j) ring.push_back(top_id(nx, j));
  for (int i = nx; i > 0; --i) ring.push_back(top_id(i, ny));
  for (int j = ny; j > 0; --j) ring.push_back(top_id(0, j));
  const auto base = static_cast<std::uint32_t>(m.vertices.size());
  for (auto v : ring) m.vertices.emplace_back(m.vertices[v].x(), m.vertices[v].y(), bottom);
  const auto n = static_cast<std::uint32_t>(ring.size());
  for (std::uint32_t k = 0; k < n; ++k) {
    const std::uint32_t a = ring[k], b = ring[(k + 1) % n];
    const std::uint32_t a0 = base + k, b0 = base + (k + 1) % n;
    m.faces.push_back({a0, b0, b});
    m.faces.push_back({a0, b, a});
  }
  if (label != kUnlabeled) m.face_labels.assign(m.faces.size(), label);
  return m;
}

TriMesh uv_sphere(const Vec3& c, double r, int slices, int stacks) {
  TriMesh m;
  m.vertices.push_back(c + Vec3(0, 0, r));  // north pole
  for (int s = 1; s < stacks; ++s) {
    const double phi = std::numbers::pi * s / stacks;
    for (int k = 0; k < slices; ++k) {
      const double th = 2.0 * std::numbers::pi * k / slices;
      m.vertices.push_back(c + r * Vec3(std::sin(phi) * std::cos(th), std::sin(phi) * std::sin(th),
                                        std::cos(phi)));
    }
  }
  m.vertices.push_back(c - Vec3(0, 0, r));  // south pole
  const auto south = static_cast<std::uint32_t>(m.vertices.size() - 1);
  auto ring = [slices](int s, int k) {
    return static_cast<std::uint32_t>(1 + (s - 1) * slices + ((k % slices) + slices) % slices);
  };
  for (int k = 0; k < slices; ++k) m.faces.push_back({0, ring(1, k), ring(1, k + 1)});
  for (int s = 1; s < stacks - 1; ++s)
    for (int k = 0; k < slices; ++k) {
      m.faces.push_back({ring(s, k), ring(s + 1, k), ring(s + 1, k + 1)});
      m.faces.push_back({ring(s, k), ring(s + 1, k + 1), ring(s, k + 1)});
    }
  for (int k = 0; k < slices; ++k)
    m.faces.push_back({south, ring(stacks - 1, k + 1), ring(stacks - 1, k)});
  return m;
}

TriMesh icosphere(const Vec3& c, double r, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const auto id = static_cast<std::uint32_t>(v.size() - 1);
      mid.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    for (const Face& tri : f) {
      const auto ab = midpoint(tri[0], tri[1]), bc = midpoint(tri[1], tri[2]),
                 ca = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  TriMesh m;
  for (const auto& p : v) m.vertices.push_back(c + r * p);
  m.faces = std::move(f);
  return m;
}

}  // namespace scenegrasp::shapes
