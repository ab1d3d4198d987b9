#pragma once

// Data-parallel inner loops. Each kernel has a straightforward serial
// reference in `serial::` and an OpenMP version in `parallel::`; the public
// operations call the parallel one, the tests check the two agree, and
// bench/ times them against each other. Both variants produce bit-identical
// results for any thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "scenegrasp/distance.hpp"
#include "scenegrasp/mesh.hpp"
#include "scenegrasp/voxel_grid.hpp"

namespace scenegrasp::kernels {

namespace serial {

/// Marks every cell of `grid` that overlaps a triangle of `mesh`.
void rasterize_triangles(const TriMesh& mesh, VoxelGrid& grid);
/// Column-wise: a cell becomes occupied if any cell at or above it is.
void fill_below(VoxelGrid& grid);
/// Number of points whose cell is occupied (outside the grid = free).
std::size_t count_in_occupied(std::span<const Vec3> points, const VoxelGrid& grid);
/// Sum over points in occupied cells of the height to the first free cell
/// above (or the grid top).
double sum_fill_depth(std::span<const Vec3> points, const VoxelGrid& grid);
std::vector<double> signed_distances(const MeshDistance& mesh, std::span<const Vec3> points);
std::vector<double> unsigned_distances(const MeshDistance& mesh, std::span<const Vec3> points);

}  // namespace serial

namespace parallel {

void rasterize_triangles(const TriMesh& mesh, VoxelGrid& grid);
void fill_below(VoxelGrid& grid);
std::size_t count_in_occupied(std::span<const Vec3> points, const VoxelGrid& grid);
double sum_fill_depth(std::span<const Vec3> points, const VoxelGrid& grid);
std::vector<double> signed_distances(const MeshDistance& mesh, std::span<const Vec3> points);
std::vector<double> unsigned_distances(const MeshDistance& mesh, std::span<const Vec3> points);

}  // namespace parallel

/// Depth of one point below the first free cell of its column (0 if the
/// point's cell is free or outside the grid).
double fill_depth(const Vec3& p, const VoxelGrid& grid);

}  // namespace scenegrasp::kernels
