#include <algorithm>
#include <cmath>

#include "scenegrasp/kernels.hpp"

namespace scenegrasp::kernels {

namespace {

struct CellRange {
  int lo[3];
  int hi[3];
  bool empty() const { return lo[0] > hi[0] || lo[1] > hi[1] || lo[2] > hi[2]; }
};

// Cells whose closed bounds can touch the triangle's bounding box, padded by
// one cell each way: a triangle lying on a cell face must also visit the
// cell on the other side, and (x - o) / s can round either way of the exact
// boundary. The exact overlap test below does the deciding.
CellRange candidate_cells(const Vec3& a, const Vec3& b, const Vec3& c, const VoxelGrid& g) {
  CellRange r{};
  const Vec3 lo = a.cwiseMin(b).cwiseMin(c), hi = a.cwiseMax(b).cwiseMax(c);
  for (int ax = 0; ax < 3; ++ax) {
    const double s = g.voxel_size(), o = g.origin()[ax];
    const double first = std::max(0.0, std::floor((lo[ax] - o) / s) - 1.0);
    const double last = std::min(static_cast<double>(g.dims()[ax] - 1), std::floor((hi[ax] - o) / s) + 1.0);
    if (!(first <= last)) {
      r.lo[ax] = 0;
      r.hi[ax] = -1;
      continue;
    }
    r.lo[ax] = static_cast<int>(first);
    r.hi[ax] = static_cast<int>(last);
  }
  return r;
}

bool cell_overlaps(const VoxelGrid& g, int i, int j, int k, const Vec3& a, const Vec3& b,
                   const Vec3& c) {
  return triangle_box_overlap(g.cell_bounds(i, j, k), a, b, c);
}

}  // namespace

double fill_depth(const Vec3& p, const VoxelGrid& grid) {
  const auto cell = grid.cell_of(p);
  if (!cell) return 0.0;
  const auto [i, j, k] = *cell;
  if (!grid.occupied(i, j, k)) return 0.0;
  int top = k + 1;
  while (top < grid.dims()[2] && grid.occupied(i, j, top)) ++top;
  const double free_z = grid.origin().z() + grid.voxel_size() * top;
  return std::max(0.0, free_z - p.z());
}

namespace serial {

void rasterize_triangles(const TriMesh& mesh, VoxelGrid& grid) {
  for (const Face& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    const CellRange r = candidate_cells(a, b, c, grid);
    if (r.empty()) continue;
    for (int k = r.lo[2]; k <= r.hi[2]; ++k)
      for (int j = r.lo[1]; j <= r.hi[1]; ++j)
        for (int i = r.lo[0]; i <= r.hi[0]; ++i)
          if (!grid.occupied(i, j, k) && cell_overlaps(grid, i, j, k, a, b, c))
            grid.set(i, j, k);
  }
}

void fill_below(VoxelGrid& grid) {
  const auto [nx, ny, nz] = grid.dims();
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      bool above = false;
      for (int k = nz - 1; k >= 0; --k) {
        above = above || grid.occupied(i, j, k);
        if (above) grid.set(i, j, k);
      }
    }
  grid.set_filled(true);
}

std::size_t count_in_occupied(std::span<const Vec3> points, const VoxelGrid& grid) {
  std::size_t n = 0;
  for (const Vec3& p : points) n += grid.occupied_at(p) ? 1 : 0;
  return n;
}

double sum_fill_depth(std::span<const Vec3> points, const VoxelGrid& grid) {
  double sum = 0.0;
  for (const Vec3& p : points) sum += fill_depth(p, grid);
  return sum;
}

}  // namespace serial

namespace parallel {

// Each thread owns whole x-slabs, so writes never race and the result does
// not depend on scheduling.
void rasterize_triangles(const TriMesh& mesh, VoxelGrid& grid) {
  const int nx = grid.dims()[0];
  std::vector<CellRange> ranges(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& t = mesh.faces[f];
    ranges[f] = candidate_cells(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]], grid);
  }
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < nx; ++i) {
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      const CellRange& r = ranges[f];
      if (r.empty() || i < r.lo[0] || i > r.hi[0]) continue;
      const Face& t = mesh.faces[f];
      const Vec3& a = mesh.vertices[t[0]];
      const Vec3& b = mesh.vertices[t[1]];
      const Vec3& c = mesh.vertices[t[2]];
      for (int k = r.lo[2]; k <= r.hi[2]; ++k)
        for (int j = r.lo[1]; j <= r.hi[1]; ++j)
          if (!grid.occupied(i, j, k) && cell_overlaps(grid, i, j, k, a, b, c)) grid.set(i, j, k);
    }
  }
}

void fill_below(VoxelGrid& grid) {
  const auto [nx, ny, nz] = grid.dims();
  const int columns = nx * ny;
#pragma omp parallel for schedule(static)
  for (int col = 0; col < columns; ++col) {
    const int i = col % nx, j = col / nx;
    int top = nz - 1;
    while (top >= 0 && !grid.occupied(i, j, top)) --top;
    for (int k = top - 1; k >= 0; --k) grid.set(i, j, k);
  }
  grid.set_filled(true);
}

std::size_t count_in_occupied(std::span<const Vec3> points, const VoxelGrid& grid) {
  long long n = 0;
  const auto count = static_cast<long long>(points.size());
#pragma omp parallel for reduction(+ : n) schedule(static)
  for (long long v = 0; v < count; ++v) n += grid.occupied_at(points[v]) ? 1 : 0;
  return static_cast<std::size_t>(n);
}

// Per-point depths are computed in parallel and summed in index order so
// the floating-point result matches the serial loop exactly.
double sum_fill_depth(std::span<const Vec3> points, const VoxelGrid& grid) {
  std::vector<double> depth(points.size());
  const auto count = static_cast<long long>(points.size());
#pragma omp parallel for schedule(static)
  for (long long v = 0; v < count; ++v) depth[v] = fill_depth(points[v], grid);
  double sum = 0.0;
  for (double d : depth) sum += d;
  return sum;
}

}  // namespace parallel

}  // namespace scenegrasp::kernels
