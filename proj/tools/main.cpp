// scenegrasp command-line front end. Exit codes: 0 ok, 1 a sample (or the
// single requested operation) failed, 2 usage or configuration error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scenegrasp/errors.hpp"
#include "scenegrasp/fixtures.hpp"
#include "scenegrasp/io_util.hpp"
#include "scenegrasp/log.hpp"
#include "scenegrasp/mesh_io.hpp"
#include "scenegrasp/pipeline.hpp"
#include "scenegrasp/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scenegrasp;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string log_level = "info";
};

PipelineConfig load_config(const Globals& g) {
  PipelineConfig cfg = g.config.empty() ? PipelineConfig{} : PipelineConfig::load(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.jobs) cfg.jobs = *g.jobs;
  cfg.validate();
  return cfg;
}

Vec3 vec3(const std::vector<double>& v) { return Vec3(v[0], v[1], v[2]); }
json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_atomically(path, j.dump(2) + "\n");
}

json stats_json(const FloorStats& s) {
  json windows = json::array();
  for (const auto& w : s.per_window)
    windows.push_back({{"id", w.id},
                       {"count", w.count},
                       {"mean_abs_dev", w.mean_abs_dev},
                       {"std_dev", w.std_dev}});
  return {{"count", s.count},
          {"mean_abs_dev", s.mean_abs_dev},
          {"std_dev", s.std_dev},
          {"signed_mean", s.signed_mean},
          {"window_avg_mean_abs_dev", s.window_avg_mean_abs_dev},
          {"window_avg_std_dev", s.window_avg_std_dev},
          {"per_window", windows}};
}

struct SceneArgs {
  std::string scene, labels, receptacle = "table";
};

void add_scene_args(CLI::App* app, SceneArgs& a, bool receptacle) {
  app->add_option("--scene", a.scene, "scene mesh (.ply/.obj)")->required()->check(CLI::ExistingFile);
  app->add_option("--labels", a.labels, "label table JSON")->required()->check(CLI::ExistingFile);
  if (receptacle) app->add_option("--receptacle", a.receptacle, "receptacle label name");
}

struct LoadedScene {
  LabelTable labels;
  TriMesh mesh;
};

LoadedScene load_scene(const SceneArgs& a) {
  LoadedScene s;
  s.labels = load_label_table(a.labels);
  s.mesh = load_mesh(a.scene, &s.labels);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene-aware grasp-sequence toolkit"};
  app.require_subcommand(1);
  // Global options may also follow the subcommand.
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "pipeline config JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "global seed");
  app.add_option("--jobs", g.jobs, "parallel samples")->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.log_level, "debug|info|warn|error")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

  // refine-floor
  SceneArgs refine_scene_args;
  std::string refine_out, refine_stats;
  auto* refine = app.add_subcommand("refine-floor", "level the scene floor window by window");
  add_scene_args(refine, refine_scene_args, false);
  refine->add_option("--out", refine_out, "refined scene mesh")->required();
  refine->add_option("--stats", refine_stats, "before/after statistics JSON");

  // align-walk
  SceneArgs walk_scene_args;
  std::string walk_traj, walk_out;
  auto* walk = app.add_subcommand("align-walk", "place a walking trajectory in the scene");
  add_scene_args(walk, walk_scene_args, true);
  walk->add_option("--trajectory", walk_traj)->required()->check(CLI::ExistingFile);
  walk->add_option("--out", walk_out, "alignment JSON (includes the aligned trajectory)")->required();

  // place-object
  SceneArgs place_scene_args;
  std::string place_object_path, place_out, place_pose_out;
  std::vector<double> place_end;
  auto* place = app.add_subcommand("place-object", "rest an object on the receptacle");
  add_scene_args(place, place_scene_args, true);
  place->add_option("--object", place_object_path)->required()->check(CLI::ExistingFile);
  place->add_option("--end", place_end, "walk end position x y z")->required()->expected(3);
  place->add_option("--out", place_out, "placed object mesh")->required();
  place->add_option("--pose-out", place_pose_out, "placement JSON");

  // augment-pelvis
  SceneArgs aug_scene_args;
  std::string aug_object, aug_out, aug_id = "sample";
  std::vector<double> aug_pelvis;
  auto* augment = app.add_subcommand("augment-pelvis", "sample alternative pelvis targets");
  add_scene_args(augment, aug_scene_args, true);
  augment->add_option("--object", aug_object, "object mesh, already placed")->required()->check(CLI::ExistingFile);
  augment->add_option("--pelvis", aug_pelvis, "original pelvis x y z")->required()->expected(3);
  augment->add_option("--id", aug_id, "sample id used to derive the stream seed");
  augment->add_option("--out", aug_out, "candidates JSON")->required();

  // voxelize
  SceneArgs vox_scene_args;
  std::string vox_out, vox_json;
  std::vector<double> vox_center;
  bool vox_no_fill = false;
  auto* vox = app.add_subcommand("voxelize", "occupancy grid around a point");
  add_scene_args(vox, vox_scene_args, false);
  vox->add_option("--center", vox_center, "region centre x y z")->required()->expected(3);
  vox->add_option("--out", vox_out, "binary grid")->required();
  vox->add_option("--json", vox_json, "JSON dump (grids up to 32^3)");
  vox->add_flag("--no-fill", vox_no_fill, "skip the downward fill");

  // eval
  std::string eval_manifest, eval_out, eval_method = "method";
  auto* eval = app.add_subcommand("eval", "score body frames against scenes");
  eval->add_option("--manifest", eval_manifest)->required()->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out)->required();
  eval->add_option("--method", eval_method, "row label in the aggregate table");

  // run
  std::string run_manifest, run_out;
  auto* run = app.add_subcommand("run", "full pipeline over a dataset manifest");
  run->add_option("--manifest", run_manifest)->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_out)->required();

  // gen-fixtures
  std::string fx_kind, fx_out;
  FixtureOptions fx_opts;
  auto* fx = app.add_subcommand("gen-fixtures", "write synthetic test data");
  fx->add_option("--kind", fx_kind)->required();
  fx->add_option("--out", fx_out)->required();
  fx->add_option("--count", fx_opts.count, "table-scene samples")->check(CLI::PositiveNumber);
  fx->add_option("--ratio", fx_opts.scene_ratio, "graded-penetration scene ratio");
  fx->add_option("--floor-ratio", fx_opts.floor_ratio, "graded-penetration floor ratio");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  set_log_level(g.log_level == "debug"  ? LogLevel::Debug
                : g.log_level == "warn" ? LogLevel::Warn
                : g.log_level == "error" ? LogLevel::Error
                                         : LogLevel::Info);
  try {
    const PipelineConfig cfg = load_config(g);

    if (*refine) {
      const LoadedScene s = load_scene(refine_scene_args);
      const int floor = require_label(s.labels, cfg.floor_label);
      const RefineResult r = refine_scene(s.mesh, floor, cfg.refine);
      if (fs::path(refine_out).has_parent_path())
        fs::create_directories(fs::path(refine_out).parent_path());
      write_mesh(refine_out, r.scene, &s.labels);
      json stats = {{"before", stats_json(r.before)}, {"after", stats_json(r.after)}};
      stats["windows"] = json::array();
      for (const auto& w : r.windows)
        stats["windows"].push_back({{"id", w.id},
                                    {"bounds", {w.x_min, w.y_min, w.x_max, w.y_max}},
                                    {"t_z", w.t_z},
                                    {"r_x", w.r_x},
                                    {"r_y", w.r_y},
                                    {"vertex_count", w.vertex_count},
                                    {"fitted", w.fitted}});
      if (!refine_stats.empty()) write_json(refine_stats, stats);
      log_event(LogLevel::Info, "floor refined",
                {{"before", r.before.mean_abs_dev}, {"after", r.after.mean_abs_dev}});
      return 0;
    }

    if (*walk) {
      const LoadedScene s = load_scene(walk_scene_args);
      const SceneContext ctx =
          SceneContext::build(s.mesh, find_label(s.labels, cfg.floor_label),
                              require_label(s.labels, walk_scene_args.receptacle), cfg.penetration);
      Trajectory traj = load_trajectory(walk_traj);
      const WalkAlignment a = align_walk(traj, ctx, cfg.walk);
      json aligned = json::array();
      for (const Vec3& p : traj.pelvis) aligned.push_back(vec_json(a.transform.apply(p)));
      write_json(walk_out, {{"yaw", a.yaw},
                            {"translation", vec_json(a.translation)},
                            {"final_distance", a.final_distance},
                            {"candidates", a.candidates},
                            {"feasible", a.feasible},
                            {"pose", pose_to_json(a.transform)},
                            {"fps", traj.fps},
                            {"pelvis", aligned}});
      return 0;
    }

    if (*place) {
      const LoadedScene s = load_scene(place_scene_args);
      const SceneContext ctx =
          SceneContext::build(s.mesh, find_label(s.labels, cfg.floor_label),
                              require_label(s.labels, place_scene_args.receptacle), cfg.penetration);
      const TriMesh object = load_mesh(place_object_path);
      const PlacementResult p = place_object(ctx, vec3(place_end), object, cfg.placement);
      if (fs::path(place_out).has_parent_path())
        fs::create_directories(fs::path(place_out).parent_path());
      write_mesh(place_out, apply_transform(object, p.pose));
      if (!place_pose_out.empty())
        write_json(place_pose_out, {{"pose", pose_to_json(p.pose)},
                                    {"support_point", vec_json(p.support_point)},
                                    {"support_vertex", p.support_vertex}});
      return 0;
    }

    if (*augment) {
      const LoadedScene s = load_scene(aug_scene_args);
      const SceneContext ctx =
          SceneContext::build(s.mesh, find_label(s.labels, cfg.floor_label),
                              require_label(s.labels, aug_scene_args.receptacle), cfg.penetration);
      const TriMesh object = load_mesh(aug_object);
      const std::uint64_t seed = derive_seed(cfg.seed, aug_id);
      const AugmentResult r = augment_pelvis(ctx.occupancy, ctx.receptacle.bounds(),
                                             object.bounds().center(), vec3(aug_pelvis), cfg.augment, seed);
      write_json(aug_out, r.report());
      return r.candidates.size() == cfg.augment.output_count ? 0 : 1;
    }

    if (*vox) {
      const LoadedScene s = load_scene(vox_scene_args);
      const Aabb region = penetration_region(vec3(vox_center), s.mesh.bounds(), cfg.penetration);
      const VoxelGrid grid =
          vox_no_fill ? voxelize(find_label(s.labels, cfg.floor_label)
                                     ? s.mesh.drop_label(*find_label(s.labels, cfg.floor_label))
                                     : s.mesh,
                                 region, cfg.penetration.voxel_size, cfg.penetration.cell_budget)
                      : scene_occupancy(s.mesh, find_label(s.labels, cfg.floor_label), region,
                                        cfg.penetration);
      if (fs::path(vox_out).has_parent_path()) fs::create_directories(fs::path(vox_out).parent_path());
      write_grid(vox_out, grid);
      if (!vox_json.empty()) write_json(vox_json, grid_to_json(grid));
      log_event(LogLevel::Info, "voxelized",
                {{"cells", grid.cell_count()}, {"occupied", grid.occupied_count()}});
      return 0;
    }

    if (*eval) {
      const DatasetManifest m = DatasetManifest::load(eval_manifest);
      const EvalSummary r = evaluate_dataset(m, cfg, eval_out, eval_method);
      if (r.row) std::cout << render_table({*r.row});
      return r.exit_code();
    }

    if (*run) {
      const DatasetManifest m = DatasetManifest::load(run_manifest);
      const RunSummary r = run_pipeline(m, cfg, run_out);
      return r.exit_code();
    }

    if (*fx) {
      fx_opts.kind = fixture_kind_from_string(fx_kind);
      fx_opts.seed = cfg.seed;
      gen_fixtures(fx_opts, fx_out);
      return 0;
    }
  } catch (const ConfigError& e) {
    log_event(LogLevel::Error, "configuration error", {{"error", e.what()}});
    return 2;
  } catch (const std::exception& e) {
    log_event(LogLevel::Error, "failed", {{"error", e.what()}});
    return 1;
  }
  return 2;
}
