#include "scenegrasp/scene_synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "scenegrasp/errors.hpp"
#include "scenegrasp/io_util.hpp"
#include "scenegrasp/rng.hpp"
#include "scenegrasp/spatial_index.hpp"

namespace scenegrasp {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view sample_id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : sample_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(global_seed ^ splitmix64(h));
}

// ---- trajectories ----------------------------------------------------------

void Trajectory::validate() const {
  if (pelvis.size() < 2) throw ValidationError("trajectory needs at least 2 frames");
  for (const Vec3& p : pelvis)
    if (!p.allFinite()) throw ValidationError("trajectory has a non-finite pelvis position");
  if (!(fps > 0)) throw ValidationError("trajectory frame rate must be positive");
}

Vec3 Trajectory::walk_direction() const {
  for (std::size_t n = pelvis.size() - 1; n > 0; --n) {
    Vec3 d = pelvis[n] - pelvis[n - 1];
    d.z() = 0;
    if (d.norm() > 1e-12) return d.normalized();
  }
  return Vec3::UnitX();
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("trajectory: ") + e.what(), e.byte);
  }
  Trajectory t;
  t.fps = j.value("fps", 30.0);
  for (const auto& p : j.at("pelvis"))
    t.pelvis.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
  t.validate();
  return t;
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  nlohmann::json pts = nlohmann::json::array();
  for (const Vec3& p : traj.pelvis) pts.push_back({p.x(), p.y(), p.z()});
  write_atomically(path, nlohmann::json{{"fps", traj.fps}, {"pelvis", pts}}.dump() + "\n");
}

SceneContext SceneContext::build(const TriMesh& scene, std::optional<int> floor_label,
                                 int receptacle_label, const PenConfig& pen) {
  SceneContext ctx;
  ctx.scene = scene;
  ctx.floor_label = floor_label;
  ctx.receptacle_label = receptacle_label;
  ctx.receptacle = scene.select_label(receptacle_label);
  if (ctx.receptacle.faces.empty())
    throw ValidationError("scene has no faces with receptacle label " +
                          std::to_string(receptacle_label));
  ctx.bounds = scene.bounds();
  Aabb region = ctx.bounds;
  region.min.z() = std::min(region.min.z(), 0.0);
  region.max.z() = std::max(region.max.z(), region.min.z() + pen.voxel_size);
  ctx.occupancy = scene_occupancy(scene, floor_label, region, pen);
  return ctx;
}

// ---- walk alignment --------------------------------------------------------

void WalkSearchConfig::validate() const {
  if (yaw_count <= 0 || !(translation_step > 0) || !(reach_max > 0) || !(capsule_radius > 0))
    throw ConfigError("walk search config values must be positive");
}

Capsule body_capsule(const Vec3& pelvis, double radius) {
  Capsule c;
  c.bottom = Vec3(pelvis.x(), pelvis.y(), radius);
  c.top_z = std::max(radius, pelvis.z());
  c.radius = radius;
  return c;
}

namespace {

struct WalkCandidate {
  int yaw_index = 0;
  double yaw = 0;
  Vec3 t = Vec3::Zero();
  double final_distance = std::numeric_limits<double>::infinity();
  bool reach_ok = false;
  int out_of_bounds = 0;
  int colliding = -1;  // -1: not evaluated
  bool feasible() const { return reach_ok && out_of_bounds == 0 && colliding == 0; }
};

bool better(const WalkCandidate& a, const WalkCandidate& b) {
  if (a.final_distance != b.final_distance) return a.final_distance < b.final_distance;
  const double na = a.t.norm(), nb = b.t.norm();
  if (na != nb) return na < nb;
  return std::abs(a.yaw) < std::abs(b.yaw);
}

}  // namespace

WalkAlignment align_walk(const Trajectory& traj, const SceneContext& ctx,
                         const WalkSearchConfig& cfg) {
  traj.validate();
  cfg.validate();
  const MeshDistance receptacle(ctx.receptacle);
  const Aabb& fb = ctx.bounds;
  const double step = cfg.translation_step;

  std::vector<WalkCandidate> cands;
  for (int y = 0; y < cfg.yaw_count; ++y) {
    double yaw = 2.0 * std::numbers::pi * y / cfg.yaw_count;
    if (yaw > std::numbers::pi) yaw -= 2.0 * std::numbers::pi;
    const Mat3 r = rotation_z(yaw);
    // Lattice range keeping the first frame over the footprint.
    const Vec3 s = r * traj.pelvis.front();
    const long long ix0 = static_cast<long long>(std::ceil((fb.min.x() - s.x()) / step));
    const long long ix1 = static_cast<long long>(std::floor((fb.max.x() - s.x()) / step));
    const long long iy0 = static_cast<long long>(std::ceil((fb.min.y() - s.y()) / step));
    const long long iy1 = static_cast<long long>(std::floor((fb.max.y() - s.y()) / step));
    for (long long iy = iy0; iy <= iy1; ++iy)
      for (long long ix = ix0; ix <= ix1; ++ix) {
        WalkCandidate c;
        c.yaw_index = y;
        c.yaw = yaw;
        c.t = Vec3(static_cast<double>(ix) * step, static_cast<double>(iy) * step, 0.0);
        cands.push_back(c);
      }
  }
  if (cands.empty()) throw NoSolutionError("walk alignment: translation lattice is empty");

  const auto total = static_cast<long long>(cands.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long long n = 0; n < total; ++n) {
    WalkCandidate& c = cands[n];
    const Mat3 r = rotation_z(c.yaw);
    const Vec3 last = r * traj.pelvis.back() + c.t;
    if (receptacle.bounds().distance_to(last) > cfg.reach_max) {
      c.final_distance = receptacle.bounds().distance_to(last);
      continue;
    }
    c.final_distance = receptacle.unsigned_distance(last);
    c.reach_ok = c.final_distance <= cfg.reach_max;
    if (!c.reach_ok) continue;
    c.colliding = 0;
    for (const Vec3& p : traj.pelvis) {
      const Vec3 q = r * p + c.t;
      if (q.x() < fb.min.x() || q.x() > fb.max.x() || q.y() < fb.min.y() || q.y() > fb.max.y()) {
        ++c.out_of_bounds;
        continue;
      }
      if (capsule_hits(ctx.occupancy, body_capsule(q, cfg.capsule_radius))) ++c.colliding;
    }
  }

  const WalkCandidate* best = nullptr;
  std::size_t feasible = 0;
  for (const auto& c : cands) {
    if (!c.feasible()) continue;
    ++feasible;
    if (!best || better(c, *best)) best = &c;
  }
  if (!best) {
    // Least-violating candidate: fewest violating frames, then distance.
    const WalkCandidate* worst_best = &cands.front();
    auto violations = [](const WalkCandidate& c) {
      return c.colliding < 0 ? std::numeric_limits<int>::max() : c.colliding + c.out_of_bounds;
    };
    for (const auto& c : cands) {
      const int vc = violations(c), vb = violations(*worst_best);
      if (vc < vb || (vc == vb && better(c, *worst_best))) worst_best = &c;
    }
    nlohmann::json detail = {
        {"candidates", cands.size()},
        {"best_infeasible",
         {{"yaw", worst_best->yaw},
          {"translation", {worst_best->t.x(), worst_best->t.y()}},
          {"final_distance", worst_best->final_distance},
          {"reach_ok", worst_best->reach_ok},
          {"colliding_frames", worst_best->colliding},
          {"out_of_bounds_frames", worst_best->out_of_bounds}}}};
    throw NoSolutionError("walk alignment found no collision-free candidate: " + detail.dump());
  }
  WalkAlignment out;
  out.yaw = best->yaw;
  out.translation = best->t;
  out.transform = RigidTransform::from_yaw(best->yaw, best->t);
  out.final_distance = best->final_distance;
  out.candidates = cands.size();
  out.feasible = feasible;
  return out;
}

// ---- placement -------------------------------------------------------------

PlacementResult place_object(const SceneContext& ctx, const Vec3& end_position,
                             const TriMesh& object, const PlacementConfig& cfg) {
  if (object.vertices.empty()) throw ValidationError("cannot place an empty object");
  if (!object.is_watertight()) throw ValidationError("placed objects must be watertight");
  const TriMesh& rec = ctx.receptacle;

  // A vertex supports the object only if every receptacle face around it
  // faces up.
  std::vector<char> upward(rec.vertices.size(), 1), touched(rec.vertices.size(), 0);
  for (std::size_t f = 0; f < rec.faces.size(); ++f) {
    const bool up = rec.face_normal(f).z() > cfg.up_threshold;
    for (auto v : rec.faces[f]) {
      touched[v] = 1;
      if (!up) upward[v] = 0;
    }
  }
  const SpatialIndex index(rec.vertices);
  const auto reachable = index.within_radius(end_position, cfg.reach_max);

  std::optional<std::uint32_t> best;
  for (auto v : reachable) {
    if (!touched[v] || !upward[v]) continue;
    if (!best) {
      best = v;
      continue;
    }
    const Vec3& p = rec.vertices[v];
    const Vec3& q = rec.vertices[*best];
    if (p.z() > q.z() + 1e-9) {
      best = v;
    } else if (std::abs(p.z() - q.z()) <= 1e-9) {
      const double dp = (p - end_position).norm(), dq = (q - end_position).norm();
      if (dp < dq || (dp == dq && v < *best)) best = v;
    }
  }
  if (!best)
    throw NoSolutionError("no upward-facing receptacle point within " +
                          std::to_string(cfg.reach_max) + " m of the end position");

  const Vec3 support = rec.vertices[*best];
  const Aabb ob = object.bounds();
  const Vec3 t(support.x() - ob.center().x(), support.y() - ob.center().y(),
               support.z() - ob.min.z());
  PlacementResult out;
  out.pose = RigidTransform::translation_only(t);
  out.support_point = support;
  out.receptacle_label = ctx.receptacle_label;
  out.support_vertex = *best;
  return out;
}

double receptacle_interpenetration(const TriMesh& placed, const TriMesh& rec, double up_threshold) {
  double worst = 0.0;
  for (std::size_t f = 0; f < rec.faces.size(); ++f) {
    const Vec3 n = rec.face_normal(f);
    if (n.z() <= up_threshold) continue;
    const Vec3& a = rec.vertices[rec.faces[f][0]];
    const Vec3& b = rec.vertices[rec.faces[f][1]];
    const Vec3& c = rec.vertices[rec.faces[f][2]];
    for (const Vec3& p : placed.vertices) {
      // Barycentric test in x-y.
      const double det = (b.y() - c.y()) * (a.x() - c.x()) + (c.x() - b.x()) * (a.y() - c.y());
      if (std::abs(det) < 1e-15) continue;
      const double l1 = ((b.y() - c.y()) * (p.x() - c.x()) + (c.x() - b.x()) * (p.y() - c.y())) / det;
      const double l2 = ((c.y() - a.y()) * (p.x() - c.x()) + (a.x() - c.x()) * (p.y() - c.y())) / det;
      const double l3 = 1.0 - l1 - l2;
      if (l1 < 0 || l2 < 0 || l3 < 0) continue;
      const double surface_z = l1 * a.z() + l2 * b.z() + l3 * c.z();
      // Only count vertices resting on this face from above, i.e. within
      // the object's vertical span near the surface.
      const double depth = surface_z - p.z();
      if (depth > 0 && depth < 0.5) worst = std::max(worst, depth);
    }
  }
  return worst;
}

// ---- pelvis augmentation ---------------------------------------------------

void AugmentConfig::validate() const {
  if (sample_count == 0 || output_count == 0 || !(radius > 0) || !(height_band > 0) ||
      !(cuboid.array() > 0).all() || !(ground_max > ground_min))
    throw ConfigError("augment config values must be positive");
  if (output_count > sample_count) throw ConfigError("augment output_count exceeds sample_count");
}

bool AugmentFilters::in_sphere(const Vec3& p) const {
  return (p - object_center).norm() <= cfg.radius;
}

bool AugmentFilters::plausible(const Vec3& p) const {
  const bool over_receptacle = p.x() >= receptacle_bounds.min.x() &&
                               p.x() <= receptacle_bounds.max.x() &&
                               p.y() >= receptacle_bounds.min.y() &&
                               p.y() <= receptacle_bounds.max.y() &&
                               p.z() > receptacle_bounds.max.z();
  return !over_receptacle && p.z() >= cfg.ground_min && p.z() <= cfg.ground_max;
}

bool AugmentFilters::height_ok(const Vec3& p) const {
  return std::abs(p.z() - original_pelvis.z()) <= cfg.height_band;
}

Aabb AugmentFilters::standing_room(const Vec3& p) const {
  const double hx = 0.5 * cfg.cuboid.x(), hy = 0.5 * cfg.cuboid.y();
  return {Vec3(p.x() - hx, p.y() - hy, 0.0), Vec3(p.x() + hx, p.y() + hy, cfg.cuboid.z())};
}

bool AugmentFilters::collision_free(const Vec3& p) const {
  return !box_hits(occupancy, standing_room(p));
}

nlohmann::json AugmentResult::report() const {
  return {{"sampled", sampled},
          {"after_plausible", after_plausible},
          {"after_height", after_height},
          {"after_collision", after_collision},
          {"returned", candidates.size()},
          {"seed", seed}};
}

AugmentResult augment_pelvis(const VoxelGrid& occupancy, const Aabb& receptacle_bounds,
                             const Vec3& object_center, const Vec3& original_pelvis,
                             const AugmentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const AugmentFilters filters{occupancy, receptacle_bounds, object_center, original_pelvis, cfg};
  Rng rng(seed);

  // Uniform in the ball by rejection from the enclosing cube.
  std::vector<Vec3> samples;
  samples.reserve(cfg.sample_count);
  while (samples.size() < cfg.sample_count) {
    const Vec3 d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    if (d.squaredNorm() > 1.0) continue;
    samples.push_back(object_center + cfg.radius * d);
  }

  AugmentResult out;
  out.seed = seed;
  out.sampled = samples.size();
  std::vector<Vec3> stage;
  for (const Vec3& p : samples)
    if (filters.plausible(p)) stage.push_back(p);
  out.after_plausible = stage.size();
  std::erase_if(stage, [&](const Vec3& p) { return !filters.height_ok(p); });
  out.after_height = stage.size();

  std::vector<char> keep(stage.size(), 0);
  const auto n = static_cast<long long>(stage.size());
#pragma omp parallel for schedule(dynamic, 32)
  for (long long i = 0; i < n; ++i) keep[i] = filters.collision_free(stage[i]) ? 1 : 0;
  std::vector<Vec3> free;
  for (std::size_t i = 0; i < stage.size(); ++i)
    if (keep[i]) free.push_back(stage[i]);
  out.after_collision = free.size();

  // Uniform subset without replacement (partial Fisher-Yates), reported in
  // sampling order.
  const std::size_t take = std::min(cfg.output_count, free.size());
  std::vector<std::size_t> order(free.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
  }
  order.resize(take);
  std::sort(order.begin(), order.end());
  for (auto idx : order) {
    PelvisCandidate c;
    c.position = free[idx];
    const Vec3 d = object_center - c.position;
    c.facing = d.norm() > 0 ? Vec3(d.normalized()) : Vec3::UnitX();
    out.candidates.push_back(c);
  }
  return out;
}

Vec3 forward_grasp_target(const Vec3& last, const Vec3& dir, const Vec3& candidate,
                          const Vec3& object_center, double radius) {
  const double along = (candidate - last).dot(dir);
  if (along > 0) return candidate;
  constexpr double kNudge = 1e-6;
  Vec3 out = candidate + std::max(-2.0 * along, kNudge) * dir;
  const Vec3 off = out - object_center;
  const double dist = off.norm();
  // Pulling toward the centre stays in the forward half-space whenever the
  // object itself is ahead of the walker.
  if (dist > radius && (object_center - last).dot(dir) > 0) out = object_center + off * (radius / dist);
  return out;
}

}  // namespace scenegrasp
