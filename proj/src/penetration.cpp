#include "scenegrasp/penetration.hpp"

#include <algorithm>
#include <cmath>

#include "scenegrasp/distance.hpp"
#include "scenegrasp/errors.hpp"
#include "scenegrasp/kernels.hpp"

namespace scenegrasp {

void PenConfig::validate() const {
  if (!(voxel_size > 0.0)) throw ConfigError("penetration.voxel_size must be positive");
  if (!(region_radius > 0.0)) throw ConfigError("penetration.region_radius must be positive");
}

Aabb penetration_region(const Vec3& center, const Aabb& scene_bounds, const PenConfig& cfg) {
  cfg.validate();
  Aabb region = Aabb::around(center, cfg.region_radius);
  if (cfg.clip_to_scene) region = region.intersect(scene_bounds);
  if (!(region.volume() > 0.0))
    throw ConfigError("penetration region around the object does not intersect the scene");
  return region;
}

VoxelGrid voxelize(const TriMesh& scene, const Aabb& region, double voxel_size,
                   std::size_t cell_budget) {
  VoxelGrid grid = VoxelGrid::covering(region, voxel_size, cell_budget);
  kernels::parallel::rasterize_triangles(scene, grid);
  return grid;
}

VoxelGrid downward_fill(const VoxelGrid& grid) {
  VoxelGrid out = grid;
  kernels::parallel::fill_below(out);
  return out;
}

VoxelGrid scene_occupancy(const TriMesh& scene, std::optional<int> floor_label,
                          const Aabb& region, const PenConfig& cfg) {
  cfg.validate();
  const TriMesh solid = floor_label ? scene.drop_label(*floor_label) : scene;
  return downward_fill(voxelize(solid, region, cfg.voxel_size, cfg.cell_budget));
}

double scene_penetration(const BodyFrame& body, const VoxelGrid& grid) {
  if (body.vertices.empty()) throw ValidationError("scene penetration of an empty body");
  const auto hits = kernels::parallel::count_in_occupied(body.vertices, grid);
  return static_cast<double>(hits) / static_cast<double>(body.vertices.size());
}

double floor_penetration(const BodyFrame& body) {
  const auto feet = body.foot_ids();
  if (feet.empty()) throw ValidationError("floor penetration needs foot vertices");
  std::size_t below = 0;
  for (auto v : feet) below += body.vertices[v].z() < -kFloorEpsilon ? 1 : 0;
  return static_cast<double>(below) / static_cast<double>(feet.size());
}

ObjectPenetration object_penetration(const BodyFrame& body, const TriMesh& object) {
  const MeshDistance dist(object);
  if (!dist.watertight())
    throw ValidationError("object penetration needs a watertight object (sign undefined)");
  const auto hands = body.hand_ids();
  if (hands.empty()) throw ValidationError("object penetration needs hand vertices");
  std::vector<Vec3> pts;
  pts.reserve(hands.size());
  for (auto v : hands) pts.push_back(body.vertices[v]);
  const auto sdf = kernels::parallel::signed_distances(dist, pts);
  ObjectPenetration out;
  out.hand_vertices = sdf.size();
  double sum = 0.0;
  for (double d : sdf) {
    sum += d;
    out.negative_count += d < 0.0 ? 1 : 0;
  }
  out.mean_sdf = sum / static_cast<double>(sdf.size());
  return out;
}

double pen_loss(std::span<const Vec3> vertices, const VoxelGrid& grid, PenLossMode mode) {
  if (vertices.empty()) throw ValidationError("penetration loss of an empty vertex set");
  const double n = static_cast<double>(vertices.size());
  if (mode == PenLossMode::Indicator)
    return static_cast<double>(kernels::parallel::count_in_occupied(vertices, grid)) / n;
  return kernels::parallel::sum_fill_depth(vertices, grid) / n;
}

namespace {

struct CellSpan {
  int lo[3], hi[3];
};

// Cells whose half-open extent meets the closed box [lo, hi], clamped.
bool cells_touching(const VoxelGrid& g, const Vec3& lo, const Vec3& hi, CellSpan& out) {
  for (int a = 0; a < 3; ++a) {
    const double s = g.voxel_size(), o = g.origin()[a];
    const double first = std::max(0.0, std::floor((lo[a] - o) / s));
    const double last = std::min(static_cast<double>(g.dims()[a] - 1), std::floor((hi[a] - o) / s));
    if (!(first <= last)) return false;
    out.lo[a] = static_cast<int>(first);
    out.hi[a] = static_cast<int>(last);
  }
  return true;
}

double capsule_cell_distance(const VoxelGrid& g, int i, int j, int k, const Capsule& c) {
  const Aabb cell = g.cell_bounds(i, j, k);
  const double dx = std::max({cell.min.x() - c.bottom.x(), 0.0, c.bottom.x() - cell.max.x()});
  const double dy = std::max({cell.min.y() - c.bottom.y(), 0.0, c.bottom.y() - cell.max.y()});
  const double dz = std::max({cell.min.z() - c.top_z, 0.0, c.bottom.z() - cell.max.z()});
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

template <typename OnHit>
void visit_capsule_hits(const VoxelGrid& g, const Capsule& c, OnHit on_hit) {
  const Vec3 lo(c.bottom.x() - c.radius, c.bottom.y() - c.radius, c.bottom.z() - c.radius);
  const Vec3 hi(c.bottom.x() + c.radius, c.bottom.y() + c.radius, c.top_z + c.radius);
  CellSpan span{};
  if (!cells_touching(g, lo, hi, span)) return;
  for (int k = span.lo[2]; k <= span.hi[2]; ++k)
    for (int j = span.lo[1]; j <= span.hi[1]; ++j)
      for (int i = span.lo[0]; i <= span.hi[0]; ++i)
        if (g.occupied(i, j, k) && capsule_cell_distance(g, i, j, k, c) < c.radius)
          if (!on_hit()) return;
}

}  // namespace

bool capsule_hits(const VoxelGrid& grid, const Capsule& capsule) {
  bool hit = false;
  visit_capsule_hits(grid, capsule, [&] {
    hit = true;
    return false;
  });
  return hit;
}

std::size_t capsule_hit_count(const VoxelGrid& grid, const Capsule& capsule) {
  std::size_t n = 0;
  visit_capsule_hits(grid, capsule, [&] {
    ++n;
    return true;
  });
  return n;
}

bool box_hits(const VoxelGrid& g, const Aabb& box) {
  CellSpan span{};
  if (!cells_touching(g, box.min, box.max, span)) return false;
  for (int k = span.lo[2]; k <= span.hi[2]; ++k)
    for (int j = span.lo[1]; j <= span.hi[1]; ++j)
      for (int i = span.lo[0]; i <= span.hi[0]; ++i) {
        if (!g.occupied(i, j, k)) continue;
        const Aabb cell = g.cell_bounds(i, j, k);
        const bool interior_overlap = (cell.min.array() < box.max.array()).all() &&
                                      (box.min.array() < cell.max.array()).all();
        if (interior_overlap) return true;
      }
  return false;
}

}  // namespace scenegrasp
