#pragma once

#include <optional>
#include <span>

#include "scenegrasp/body.hpp"
#include "scenegrasp/mesh.hpp"
#include "scenegrasp/voxel_grid.hpp"

namespace scenegrasp {

struct PenConfig {
  double voxel_size = 0.05;     ///< meters
  double region_radius = 2.0;   ///< half-extent of the box voxelized around the object
  bool clip_to_scene = true;    ///< intersect that box with the scene bounds
  std::size_t cell_budget = kDefaultCellBudget;

  void validate() const;
};

/// Box of half-extent cfg.region_radius around `center`, optionally clipped
/// to `scene_bounds`. Throws ConfigError if the result has no volume.
Aabb penetration_region(const Vec3& center, const Aabb& scene_bounds, const PenConfig& cfg);

/// Conservative voxelization: a cell is occupied iff its closed box overlaps
/// at least one triangle of `scene`.
VoxelGrid voxelize(const TriMesh& scene, const Aabb& region, double voxel_size,
                   std::size_t cell_budget = kDefaultCellBudget);

/// Marks every cell at or below an occupied cell of the same column.
/// Never clears a cell; idempotent.
VoxelGrid downward_fill(const VoxelGrid& grid);

/// Evaluation grid used throughout the toolkit: voxelize the scene without
/// its floor faces (floor contact is scored separately), then fill below.
VoxelGrid scene_occupancy(const TriMesh& scene, std::optional<int> floor_label,
                          const Aabb& region, const PenConfig& cfg);

/// Fraction of body vertices whose cell is occupied. Vertices outside the
/// grid count as free. Expects a filled grid (see VoxelGrid::filled()).
double scene_penetration(const BodyFrame& body, const VoxelGrid& grid);

inline constexpr double kFloorEpsilon = 1e-6;

/// Fraction of foot vertices with z < -1e-6.
double floor_penetration(const BodyFrame& body);

struct ObjectPenetration {
  double mean_sdf = 0.0;        ///< meters; negative = inside the object
  std::size_t negative_count = 0;
  std::size_t hand_vertices = 0;
};

/// Mean signed distance from hand vertices to a watertight object.
ObjectPenetration object_penetration(const BodyFrame& body, const TriMesh& object);

enum class PenLossMode { Indicator, DepthWeighted };

/// Indicator: mean of [vertex cell occupied] (equals scene_penetration).
/// DepthWeighted: mean of the height from each vertex up to the first free
/// cell of its column, in meters (0 for free vertices).
double pen_loss(std::span<const Vec3> vertices, const VoxelGrid& grid,
                PenLossMode mode = PenLossMode::Indicator);

/// Vertical capsule: segment from (x, y, z_bottom) to (x, y, z_top) swept by
/// `radius`.
struct Capsule {
  Vec3 bottom = Vec3::Zero();
  double top_z = 0.0;
  double radius = 0.0;
};

/// Any occupied cell strictly closer than the radius to the capsule axis.
bool capsule_hits(const VoxelGrid& grid, const Capsule& capsule);
/// Number of occupied cells hit (for diagnostics).
std::size_t capsule_hit_count(const VoxelGrid& grid, const Capsule& capsule);

/// Any occupied cell whose interior overlaps the interior of `box`.
bool box_hits(const VoxelGrid& grid, const Aabb& box);

}  // namespace scenegrasp
