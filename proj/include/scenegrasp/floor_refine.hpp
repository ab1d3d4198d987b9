#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "scenegrasp/mesh.hpp"

namespace scenegrasp {

struct RefineConfig {
  double window_size = 1.0;        ///< meters, square x-y window
  double stride = 0.5;             ///< meters between window origins
  std::size_t min_floor_vertices = 50;
  int icp_iterations = 10;
  double convergence_eps = 1e-5;   ///< meters, change in mean |z|
  double max_rotation = 0.35;      ///< radians, per axis
  int max_passes = 200;            ///< level-and-blend passes over the whole floor
  double pass_tolerance = 1e-8;    ///< meters, least mean |z| gain for a pass to count

  void validate() const;
};

/// Piecewise-rigid correction for one x-y window: v' = R_y(r_y)·R_x(r_x)·v
/// + (0, 0, t_z).
struct WindowTransform {
  int id = 0;
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  double t_z = 0.0;
  double r_x = 0.0;
  double r_y = 0.0;
  std::size_t vertex_count = 0;
  /// False when the window had too few floor vertices (or an out-of-cap
  /// fit) and copies its parameters from the nearest fitted window.
  bool fitted = true;
  int iterations = 0;

  RigidTransform rigid() const;
  Vec3 apply(const Vec3& p) const { return rigid().apply(p); }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }
};

struct WindowStats {
  int id = 0;
  std::size_t count = 0;
  double mean_abs_dev = 0.0;
  double std_dev = 0.0;
};

/// Deviation of floor vertices from z = 0. `mean_abs_dev` is the mean of
/// |z|; `std_dev` the population standard deviation of the signed z. The
/// window averages are unweighted means over windows holding vertices.
struct FloorStats {
  std::size_t count = 0;
  double mean_abs_dev = 0.0;
  double std_dev = 0.0;
  double signed_mean = 0.0;
  double window_avg_mean_abs_dev = 0.0;
  double window_avg_std_dev = 0.0;
  std::vector<WindowStats> per_window;
};

/// Vertices incident to at least one face labelled `floor_label`, ascending.
/// Throws ValidationError when there are none.
std::vector<std::uint32_t> extract_floor_vertices(const TriMesh& scene, int floor_label);

/// Iterative level-and-drop fit of one window's floor points. Each round
/// fits a least-squares plane to the current points, rotates its normal
/// onto +z about x then y, and moves the centroid to z = 0; it stops when
/// mean |z| changes by less than convergence_eps, when it would increase,
/// or after icp_iterations rounds. Returns nullopt with fewer than
/// min_floor_vertices points or when a rotation exceeds the cap.
std::optional<WindowTransform> fit_window_transform(std::span<const Vec3> floor_points,
                                                    const RefineConfig& cfg);

/// Window footprints tiling the x-y bounds of `floor_points`.
std::vector<WindowTransform> window_layout(std::span<const Vec3> floor_points,
                                           const RefineConfig& cfg);

struct RefineResult {
  TriMesh scene;
  FloorStats before;
  FloorStats after;
  std::vector<WindowTransform> windows;  ///< first pass
  std::vector<std::vector<WindowTransform>> later_passes;
  int passes_applied = 0;
};

/// Fits every window independently, fills unfitted windows from the
/// nearest fitted one, then moves each vertex rigidly by the parameters
/// blended (inverse distance to window centres) at the centre of its
/// stride-sized core cell. Passes repeat on the corrected floor while each
/// gains at least pass_tolerance in mean |z|; a vertex stays in its
/// starting core cell throughout, so every cell moves rigidly.
RefineResult refine_scene(const TriMesh& scene, int floor_label, const RefineConfig& cfg = {});

FloorStats floor_stats(const TriMesh& scene, int floor_label, const RefineConfig& cfg = {});

/// Statistics of an explicit point set against a given window layout.
FloorStats floor_stats_of(std::span<const Vec3> floor_points,
                          std::span<const WindowTransform> windows);

}  // namespace scenegrasp
