#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "scenegrasp/distance.hpp"
#include "scenegrasp/mesh.hpp"
#include "scenegrasp/penetration.hpp"
#include "scenegrasp/voxel_grid.hpp"

namespace scenegrasp {

// ---- walking trajectories --------------------------------------------------

struct Trajectory {
  std::vector<Vec3> pelvis;  ///< one per frame, meters
  double fps = 30.0;

  void validate() const;
  Vec3 walk_direction() const;  ///< unit x-y direction of the last step
};

/// {"fps": 30, "pelvis": [[x, y, z], ...]}
Trajectory load_trajectory(const std::filesystem::path& path);
void write_trajectory(const std::filesystem::path& path, const Trajectory& traj);

/// Scene data shared by the synthesis steps: the occupancy grid over the
/// whole scene (floor excluded, filled) and the receptacle surface.
struct SceneContext {
  TriMesh scene;
  std::optional<int> floor_label;
  int receptacle_label = 0;
  TriMesh receptacle;
  VoxelGrid occupancy;
  Aabb bounds;

  static SceneContext build(const TriMesh& scene, std::optional<int> floor_label,
                            int receptacle_label, const PenConfig& pen);
};

struct WalkSearchConfig {
  int yaw_count = 64;
  double translation_step = 0.25;  ///< meters
  double reach_max = 0.8;          ///< final pelvis to receptacle surface
  double capsule_radius = 0.18;    ///< body proxy

  void validate() const;
};

struct WalkAlignment {
  RigidTransform transform;
  double yaw = 0.0;
  Vec3 translation = Vec3::Zero();
  double final_distance = 0.0;
  std::size_t candidates = 0;
  std::size_t feasible = 0;
};

/// Capsule proxy used for frame `pelvis`.
Capsule body_capsule(const Vec3& pelvis, double radius);

/// Exhaustive search over yaw_count yaws × a translation lattice (multiples
/// of translation_step keeping every frame over the scene footprint). A
/// candidate is feasible when no frame's capsule hits the occupancy grid and
/// the final pelvis lies within reach_max of the receptacle. Returns the
/// feasible candidate minimising (final distance, |translation|, |yaw|).
/// Throws NoSolutionError describing the least-violating candidate.
WalkAlignment align_walk(const Trajectory& traj, const SceneContext& ctx,
                         const WalkSearchConfig& cfg = {});

// ---- object placement ------------------------------------------------------

struct PlacementConfig {
  double reach_max = 0.8;
  double up_threshold = 0.8;  ///< face normal z above which a face counts as "up"
};

struct PlacementResult {
  RigidTransform pose;        ///< translation only
  Vec3 support_point = Vec3::Zero();
  int receptacle_label = 0;
  std::uint32_t support_vertex = 0;  ///< index into the receptacle sub-mesh
};

/// Support point: among receptacle vertices within reach_max of
/// `end_position` whose incident receptacle faces all face up, the highest
/// (ties: nearest to end_position, then lowest index). The object is
/// translated so its bounds' x-y centre is over that point and its lowest
/// vertex rests on it.
PlacementResult place_object(const SceneContext& ctx, const Vec3& end_position,
                             const TriMesh& object, const PlacementConfig& cfg = {});

/// Largest depth by which any vertex of `placed_object` sits below an
/// upward-facing receptacle face directly beneath or above it (0 if none).
double receptacle_interpenetration(const TriMesh& placed_object, const TriMesh& receptacle,
                                   double up_threshold = 0.8);

// ---- augmented pelvis targets ---------------------------------------------

struct AugmentConfig {
  std::size_t sample_count = 5000;
  double radius = 1.0;
  double height_band = 0.15;  ///< |z - original pelvis z| bound
  Vec3 cuboid = Vec3(0.6, 0.6, 1.8);
  std::size_t output_count = 10;
  double ground_min = 0.6;    ///< pelvis-plausible z band
  double ground_max = 1.4;

  void validate() const;
};

struct PelvisCandidate {
  Vec3 position = Vec3::Zero();
  Vec3 facing = Vec3::UnitX();  ///< unit vector towards the object centre
};

/// The four sampling filters, usable on their own to re-check candidates.
struct AugmentFilters {
  const VoxelGrid& occupancy;
  Aabb receptacle_bounds;
  Vec3 object_center;
  Vec3 original_pelvis;
  AugmentConfig cfg;

  bool in_sphere(const Vec3& p) const;
  /// Not above the receptacle, z inside the ground band.
  bool plausible(const Vec3& p) const;
  bool height_ok(const Vec3& p) const;
  Aabb standing_room(const Vec3& p) const;
  bool collision_free(const Vec3& p) const;
};

struct AugmentResult {
  std::vector<PelvisCandidate> candidates;
  std::size_t sampled = 0;
  std::size_t after_plausible = 0;
  std::size_t after_height = 0;
  std::size_t after_collision = 0;
  std::uint64_t seed = 0;

  nlohmann::json report() const;
};

AugmentResult augment_pelvis(const VoxelGrid& occupancy, const Aabb& receptacle_bounds,
                             const Vec3& object_center, const Vec3& original_pelvis,
                             const AugmentConfig& cfg, std::uint64_t seed);

/// Keeps the grasp target ahead of the walk: a candidate behind the plane
/// through `last_walk_pelvis` (normal `walk_direction`) is mirrored across
/// it, then pulled toward `object_center` if it left the `radius` ball.
Vec3 forward_grasp_target(const Vec3& last_walk_pelvis, const Vec3& walk_direction,
                          const Vec3& candidate, const Vec3& object_center, double radius = 1.0);

}  // namespace scenegrasp
