#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "scenegrasp/geometry.hpp"

namespace scenegrasp {

using CellIndex = std::array<int, 3>;

inline constexpr std::size_t kDefaultCellBudget = 64u * 1024u * 1024u;

/// Axis-aligned occupancy grid. Cell (i,j,k) covers
/// [origin + (i,j,k)·s, origin + (i+1,j+1,k+1)·s); a point maps to
/// floor((p - origin) / s). Storage is one byte per cell, x fastest.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(const Vec3& origin, double voxel_size, const CellIndex& dims,
            std::size_t cell_budget = kDefaultCellBudget);

  /// Smallest grid anchored at region.min whose cells cover `region`.
  /// Throws ConfigError past `cell_budget` cells.
  static VoxelGrid covering(const Aabb& region, double voxel_size,
                            std::size_t cell_budget = kDefaultCellBudget);

  const Vec3& origin() const { return origin_; }
  double voxel_size() const { return voxel_size_; }
  const CellIndex& dims() const { return dims_; }
  std::size_t cell_count() const { return cells_.size(); }

  /// Records whether the below-occupied fill rule has been applied.
  bool filled() const { return filled_; }
  void set_filled(bool f) { filled_ = f; }

  std::size_t linear(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_[1]) * k);
  }
  bool in_range(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims_[0] && j < dims_[1] && k < dims_[2];
  }
  bool occupied(int i, int j, int k) const { return cells_[linear(i, j, k)] != 0; }
  void set(int i, int j, int k, bool value = true) { cells_[linear(i, j, k)] = value ? 1 : 0; }

  /// Unclamped floor((p - origin) / s).
  CellIndex raw_cell_of(const Vec3& p) const;
  /// Cell containing p, or nullopt when p lies outside the grid.
  std::optional<CellIndex> cell_of(const Vec3& p) const;
  /// Points outside the grid are reported as free.
  bool occupied_at(const Vec3& p) const;

  Aabb cell_bounds(int i, int j, int k) const;
  Aabb bounds() const;
  std::size_t occupied_count() const;

  std::vector<std::uint8_t>& cells() { return cells_; }
  const std::vector<std::uint8_t>& cells() const { return cells_; }

  /// Same geometry and occupancy (fill flag ignored).
  bool same_occupancy(const VoxelGrid& other) const;

 private:
  Vec3 origin_ = Vec3::Zero();
  double voxel_size_ = 1.0;
  CellIndex dims_{0, 0, 0};
  std::vector<std::uint8_t> cells_;
  bool filled_ = false;
};

/// Binary container: "SGVOXEL1", origin (3×f64), voxel size (f64),
/// dims (3×u32), fill flag (u8), then occupancy bit-packed LSB-first in
/// linear (x-fastest) order. All little-endian.
void write_grid(const std::filesystem::path& path, const VoxelGrid& grid);
VoxelGrid read_grid(const std::filesystem::path& path);
std::string encode_grid(const VoxelGrid& grid);
VoxelGrid decode_grid(const std::string& bytes);

/// Debug dump for small grids (at most 32³ cells): header fields plus the
/// list of occupied [i,j,k] triples. Throws ConfigError on larger grids.
nlohmann::json grid_to_json(const VoxelGrid& grid);

/// Closed triangle/box overlap (separating-axis test over the 13 axes).
bool triangle_box_overlap(const Aabb& box, const Vec3& a, const Vec3& b, const Vec3& c);
bool triangle_box_overlap(const Vec3& box_center, const Vec3& half_size, const Vec3& a,
                          const Vec3& b, const Vec3& c);

}  // namespace scenegrasp
