#include "scenegrasp/floor_refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "scenegrasp/errors.hpp"

namespace scenegrasp {

void RefineConfig::validate() const {
  if (!(window_size > 0) || !(stride > 0) || icp_iterations <= 0 || !(convergence_eps > 0) ||
      !(max_rotation > 0) || min_floor_vertices == 0)
    throw ConfigError("refine config values must be positive");
  if (stride > window_size) throw ConfigError("refine stride must not exceed window size");
  if (max_passes <= 0 || !(pass_tolerance > 0)) throw ConfigError("refine pass settings must be positive");
}

RigidTransform WindowTransform::rigid() const {
  return {rotation_y(r_y) * rotation_x(r_x), Vec3(0, 0, t_z)};
}

std::vector<std::uint32_t> extract_floor_vertices(const TriMesh& scene, int floor_label) {
  if (!scene.has_labels()) throw ValidationError("scene has no face labels");
  std::vector<char> mark(scene.vertices.size(), 0);
  bool any = false;
  for (std::size_t f = 0; f < scene.faces.size(); ++f) {
    if (scene.face_labels[f] != floor_label) continue;
    any = true;
    for (auto v : scene.faces[f]) mark[v] = 1;
  }
  if (!any) throw ValidationError("scene has no floor-labelled faces");
  std::vector<std::uint32_t> out;
  for (std::size_t v = 0; v < mark.size(); ++v)
    if (mark[v]) out.push_back(static_cast<std::uint32_t>(v));
  return out;
}

namespace {

// Angles (r_x, r_y) such that R_y(r_y)·R_x(r_x)·n = +z for unit n with n.z > 0.
std::pair<double, double> level_angles(const Vec3& n) {
  const double rx = std::atan2(n.y(), n.z());
  const double rho = std::hypot(n.y(), n.z());
  const double ry = std::atan2(-n.x(), rho);
  return {rx, ry};
}

// Least-squares plane z = a·x + b·y + c; returns its upward unit normal.
Vec3 plane_normal(std::span<const Vec3> pts) {
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double sxx = 0, sxy = 0, syy = 0, sxz = 0, syz = 0;
  for (const Vec3& p : pts) {
    const Vec3 d = p - mean;
    sxx += d.x() * d.x();
    sxy += d.x() * d.y();
    syy += d.y() * d.y();
    sxz += d.x() * d.z();
    syz += d.y() * d.z();
  }
  Eigen::Matrix2d m;
  m << sxx, sxy, sxy, syy;
  const double det = m.determinant();
  if (!(std::abs(det) > 1e-18 * std::max(1.0, sxx * syy))) return Vec3::UnitZ();
  const Eigen::Vector2d ab = m.inverse() * Eigen::Vector2d(sxz, syz);
  return Vec3(-ab.x(), -ab.y(), 1.0).normalized();
}

struct FitState {
  double r_x = 0, r_y = 0, t_z = 0, residual = 0;
};

FitState evaluate(std::span<const Vec3> pts, double rx, double ry, std::vector<Vec3>& work) {
  const Mat3 r = rotation_y(ry) * rotation_x(rx);
  double sum_z = 0;
  for (std::size_t n = 0; n < pts.size(); ++n) {
    work[n] = r * pts[n];
    sum_z += work[n].z();
  }
  FitState s{rx, ry, -sum_z / static_cast<double>(pts.size()), 0.0};
  double sum_abs = 0;
  for (const Vec3& w : work) sum_abs += std::abs(w.z() + s.t_z);
  s.residual = sum_abs / static_cast<double>(pts.size());
  return s;
}

}  // namespace

std::optional<WindowTransform> fit_window_transform(std::span<const Vec3> pts,
                                                    const RefineConfig& cfg) {
  cfg.validate();
  if (pts.size() < cfg.min_floor_vertices || pts.empty()) return std::nullopt;

  std::vector<Vec3> work(pts.begin(), pts.end());
  FitState best;
  {
    double sum_abs = 0;
    for (const Vec3& p : pts) sum_abs += std::abs(p.z());
    best.residual = sum_abs / static_cast<double>(pts.size());
  }
  int rounds = 0;
  for (int it = 0; it < cfg.icp_iterations; ++it) {
    // `work` holds the points under the current rotation.
    const Vec3 n_local = plane_normal(work);
    const Mat3 current = rotation_y(best.r_y) * rotation_x(best.r_x);
    const Vec3 n = current.transpose() * n_local;
    const auto [rx, ry] = level_angles(n);
    const FitState next = evaluate(pts, rx, ry, work);
    if (next.residual > best.residual) {
      evaluate(pts, best.r_x, best.r_y, work);
      break;
    }
    const double change = best.residual - next.residual;
    best = next;
    ++rounds;
    if (change < cfg.convergence_eps) break;
  }
  if (std::abs(best.r_x) > cfg.max_rotation || std::abs(best.r_y) > cfg.max_rotation)
    return std::nullopt;

  WindowTransform w;
  w.t_z = best.t_z;
  w.r_x = best.r_x;
  w.r_y = best.r_y;
  w.vertex_count = pts.size();
  w.iterations = rounds;
  const Aabb b = Aabb::of(pts);
  w.x_min = b.min.x();
  w.y_min = b.min.y();
  w.x_max = b.max.x();
  w.y_max = b.max.y();
  return w;
}

namespace {

int window_count(double extent, const RefineConfig& cfg) {
  if (extent <= cfg.window_size) return 1;
  return static_cast<int>(std::ceil((extent - cfg.window_size) / cfg.stride - 1e-12)) + 1;
}

int core_count(double extent, const RefineConfig& cfg) {
  return std::max(1, static_cast<int>(std::ceil(extent / cfg.stride - 1e-12)));
}

bool in_window(const WindowTransform& w, const Vec3& p) {
  return p.x() >= w.x_min && p.x() <= w.x_max && p.y() >= w.y_min && p.y() <= w.y_max;
}

// Fit membership reaches slightly past the window edges, so the millimetre
// x-y drift a correction leaves behind cannot move edge points out of a
// window on a later pass or a repeated call.
bool in_fit_window(const WindowTransform& w, const Vec3& p, double slack) {
  return p.x() >= w.x_min - slack && p.x() <= w.x_max + slack && p.y() >= w.y_min - slack &&
         p.y() <= w.y_max + slack;
}

std::vector<Vec3> gather(const TriMesh& mesh, std::span<const std::uint32_t> ids) {
  std::vector<Vec3> out;
  out.reserve(ids.size());
  for (auto v : ids) out.push_back(mesh.vertices[v]);
  return out;
}

}  // namespace

std::vector<WindowTransform> window_layout(std::span<const Vec3> floor_points,
                                           const RefineConfig& cfg) {
  cfg.validate();
  const Aabb b = Aabb::of(floor_points);
  const int nx = window_count(b.extent().x(), cfg);
  const int ny = window_count(b.extent().y(), cfg);
  std::vector<WindowTransform> out;
  out.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      WindowTransform w;
      w.id = static_cast<int>(out.size());
      w.x_min = b.min.x() + i * cfg.stride;
      w.y_min = b.min.y() + j * cfg.stride;
      w.x_max = w.x_min + cfg.window_size;
      w.y_max = w.y_min + cfg.window_size;
      w.fitted = false;
      out.push_back(w);
    }
  return out;
}

FloorStats floor_stats_of(std::span<const Vec3> pts, std::span<const WindowTransform> windows) {
  if (pts.empty()) throw ValidationError("floor statistics need at least one floor vertex");
  FloorStats s;
  s.count = pts.size();
  double sum_abs = 0, sum = 0;
  for (const Vec3& p : pts) {
    sum_abs += std::abs(p.z());
    sum += p.z();
  }
  const double n = static_cast<double>(pts.size());
  s.mean_abs_dev = sum_abs / n;
  s.signed_mean = sum / n;
  double var = 0;
  for (const Vec3& p : pts) var += (p.z() - s.signed_mean) * (p.z() - s.signed_mean);
  s.std_dev = std::sqrt(var / n);

  double avg_mean = 0, avg_std = 0;
  std::size_t populated = 0;
  for (const auto& w : windows) {
    WindowStats ws;
    ws.id = w.id;
    double wa = 0, wsum = 0;
    for (const Vec3& p : pts)
      if (in_window(w, p)) {
        ++ws.count;
        wa += std::abs(p.z());
        wsum += p.z();
      }
    if (ws.count > 0) {
      const double wn = static_cast<double>(ws.count);
      const double wmean = wsum / wn;
      double wvar = 0;
      for (const Vec3& p : pts)
        if (in_window(w, p)) wvar += (p.z() - wmean) * (p.z() - wmean);
      ws.mean_abs_dev = wa / wn;
      ws.std_dev = std::sqrt(wvar / wn);
      avg_mean += ws.mean_abs_dev;
      avg_std += ws.std_dev;
      ++populated;
    }
    s.per_window.push_back(ws);
  }
  if (populated > 0) {
    s.window_avg_mean_abs_dev = avg_mean / static_cast<double>(populated);
    s.window_avg_std_dev = avg_std / static_cast<double>(populated);
  }
  return s;
}

FloorStats floor_stats(const TriMesh& scene, int floor_label, const RefineConfig& cfg) {
  const auto ids = extract_floor_vertices(scene, floor_label);
  const auto pts = gather(scene, ids);
  const auto windows = window_layout(pts, cfg);
  return floor_stats_of(pts, windows);
}

namespace {

// One level-and-blend pass over the current floor: independent window fits,
// nearest-fitted fill, then one blended rigid transform per core cell.
struct Pass {
  std::vector<WindowTransform> windows;
  std::vector<RigidTransform> core;
};

Pass fit_pass(std::span<const Vec3> floor_pts, const RefineConfig& cfg, int cx, int cy) {
  const Aabb fb = Aabb::of(floor_pts);
  Pass pass;
  pass.windows = window_layout(floor_pts, cfg);
  auto& windows = pass.windows;
  const int window_total = static_cast<int>(windows.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (int w = 0; w < window_total; ++w) {
    std::vector<Vec3> local;
    for (const Vec3& p : floor_pts)
      if (in_fit_window(windows[w], p, 0.01 * cfg.stride)) local.push_back(p);
    WindowTransform& out = windows[w];
    out.vertex_count = local.size();
    out.fitted = false;
    if (auto fit = fit_window_transform(local, cfg)) {
      out.t_z = fit->t_z;
      out.r_x = fit->r_x;
      out.r_y = fit->r_y;
      out.iterations = fit->iterations;
      out.fitted = true;
    }
  }

  // Unfitted windows copy the nearest fitted window (ties: lowest id).
  std::vector<int> fitted_ids;
  for (const auto& w : windows)
    if (w.fitted) fitted_ids.push_back(w.id);
  if (fitted_ids.empty())
    throw ValidationError("no floor window has enough vertices to fit (min " +
                          std::to_string(cfg.min_floor_vertices) + ")");
  for (auto& w : windows) {
    if (w.fitted) continue;
    double best = std::numeric_limits<double>::infinity();
    int src = fitted_ids.front();
    for (int id : fitted_ids) {
      const auto& f = windows[id];
      const double d = std::hypot(f.center_x() - w.center_x(), f.center_y() - w.center_y());
      if (d < best) {
        best = d;
        src = id;
      }
    }
    w.t_z = windows[src].t_z;
    w.r_x = windows[src].r_x;
    w.r_y = windows[src].r_y;
  }

  pass.core.resize(static_cast<std::size_t>(cx) * cy);
  for (int j = 0; j < cy; ++j)
    for (int i = 0; i < cx; ++i) {
      const double px = fb.min.x() + (i + 0.5) * cfg.stride;
      const double py = fb.min.y() + (j + 0.5) * cfg.stride;
      const Vec3 c(px, py, 0.0);
      std::vector<std::pair<double, int>> members;
      for (const auto& w : windows)
        if (in_window(w, c))
          members.push_back({std::hypot(w.center_x() - px, w.center_y() - py), w.id});
      if (members.empty()) {
        double best = std::numeric_limits<double>::infinity();
        int src = 0;
        for (const auto& w : windows) {
          const double d = std::hypot(w.center_x() - px, w.center_y() - py);
          if (d < best) {
            best = d;
            src = w.id;
          }
        }
        members.push_back({best, src});
      }
      double wsum = 0, tz = 0, rx = 0, ry = 0;
      for (const auto& [d, id] : members) {
        const double weight = 1.0 / std::max(d, 1e-9);
        wsum += weight;
        tz += weight * windows[id].t_z;
        rx += weight * windows[id].r_x;
        ry += weight * windows[id].r_y;
      }
      WindowTransform blended;
      blended.t_z = tz / wsum;
      blended.r_x = rx / wsum;
      blended.r_y = ry / wsum;
      pass.core[static_cast<std::size_t>(j) * cx + i] = blended.rigid();
    }
  return pass;
}

double mean_abs_z(const std::vector<Vec3>& mesh_vertices, std::span<const std::uint32_t> ids) {
  double s = 0;
  for (auto v : ids) s += std::abs(mesh_vertices[v].z());
  return s / static_cast<double>(ids.size());
}

}  // namespace

RefineResult refine_scene(const TriMesh& scene, int floor_label, const RefineConfig& cfg) {
  cfg.validate();
  const auto ids = extract_floor_vertices(scene, floor_label);
  const auto floor_pts = gather(scene, ids);
  const Aabb fb = Aabb::of(floor_pts);

  // Each vertex keeps the core cell it starts in for every pass, so the
  // composed correction is rigid per cell.
  const int cx = core_count(fb.extent().x(), cfg);
  const int cy = core_count(fb.extent().y(), cfg);
  std::vector<std::uint32_t> cell_of(scene.vertices.size());
  for (std::size_t v = 0; v < scene.vertices.size(); ++v) {
    const Vec3& p = scene.vertices[v];
    const int i = std::clamp(static_cast<int>(std::floor((p.x() - fb.min.x()) / cfg.stride)), 0, cx - 1);
    const int j = std::clamp(static_cast<int>(std::floor((p.y() - fb.min.y()) / cfg.stride)), 0, cy - 1);
    cell_of[v] = static_cast<std::uint32_t>(j * cx + i);
  }

  RefineResult result;
  result.scene = scene;
  double current = mean_abs_z(scene.vertices, ids);
  std::vector<Vec3> next(scene.vertices.size());
  const auto nv = static_cast<long long>(scene.vertices.size());
  for (int round = 0; round < cfg.max_passes; ++round) {
    Pass pass = fit_pass(gather(result.scene, ids), cfg, cx, cy);
#pragma omp parallel for schedule(static)
    for (long long v = 0; v < nv; ++v) next[v] = pass.core[cell_of[v]].apply(result.scene.vertices[v]);
    const double candidate = mean_abs_z(next, ids);
    // A pass is kept only for a real gain; the first that falls short is
    // dropped, which is also what a repeated call would compute.
    if (!(candidate <= current - cfg.pass_tolerance)) {
      if (round == 0) result.windows = std::move(pass.windows);
      break;
    }
    result.scene.vertices.swap(next);
    current = candidate;
    ++result.passes_applied;
    if (round == 0) result.windows = std::move(pass.windows);
    else result.later_passes.push_back(std::move(pass.windows));
  }

  result.before = floor_stats_of(floor_pts, result.windows);
  result.after = floor_stats_of(gather(result.scene, ids), result.windows);
  return result;
}

}  // namespace scenegrasp
