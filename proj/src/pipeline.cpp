#include "scenegrasp/pipeline.hpp"

#include <algorithm>
#include <set>

#include <functional>
#include <map>

#include "scenegrasp/errors.hpp"
#include "scenegrasp/io_util.hpp"
#include "scenegrasp/log.hpp"
#include "scenegrasp/mesh_io.hpp"
#include "scenegrasp/rng.hpp"

namespace scenegrasp {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- config ----------------------------------------------------------------

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(what + " must be a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

// Reads the keys of `j` that appear in `setters`; anything else is an error.
template <class Setters>
void read_section(const json& j, const std::string& section, const Setters& setters) {
  if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + section + "." + key + "'");
    try {
      it->second(value);
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + section + "." + key + "': " + e.what());
    }
  }
}

using Setter = std::function<void(const json&)>;
using SetterMap = std::map<std::string, Setter>;

template <class T>
Setter set(T& field) {
  return [&field](const json& v) { field = v.get<T>(); };
}

}  // namespace

void PipelineConfig::validate() const {
  refine.validate();
  penetration.validate();
  augment.validate();
  walk.validate();
  if (!(placement.reach_max > 0) || !(placement.up_threshold > 0 && placement.up_threshold <= 1))
    throw ConfigError("placement reach_max must be positive and up_threshold in (0, 1]");
  if (!(contact_threshold > 0)) throw ConfigError("contact_threshold must be positive");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (floor_label.empty()) throw ConfigError("floor_label must not be empty");
}

json PipelineConfig::to_json() const {
  return {{"seed", seed},
          {"jobs", jobs},
          {"floor_label", floor_label},
          {"contact_threshold", contact_threshold},
          {"refine",
           {{"window_size", refine.window_size},
            {"stride", refine.stride},
            {"min_floor_vertices", refine.min_floor_vertices},
            {"icp_iterations", refine.icp_iterations},
            {"convergence_eps", refine.convergence_eps},
            {"max_rotation", refine.max_rotation},
            {"max_passes", refine.max_passes},
            {"pass_tolerance", refine.pass_tolerance}}},
          {"penetration",
           {{"voxel_size", penetration.voxel_size},
            {"region_radius", penetration.region_radius},
            {"clip_to_scene", penetration.clip_to_scene},
            {"cell_budget", penetration.cell_budget}}},
          {"augment",
           {{"sample_count", augment.sample_count},
            {"radius", augment.radius},
            {"height_band", augment.height_band},
            {"cuboid", vec_json(augment.cuboid)},
            {"output_count", augment.output_count},
            {"ground_min", augment.ground_min},
            {"ground_max", augment.ground_max}}},
          {"walk",
           {{"yaw_count", walk.yaw_count},
            {"translation_step", walk.translation_step},
            {"reach_max", walk.reach_max},
            {"capsule_radius", walk.capsule_radius}}},
          {"placement",
           {{"reach_max", placement.reach_max}, {"up_threshold", placement.up_threshold}}}};
}

json PipelineConfig::snapshot() const {
  json j = to_json();
  j.erase("jobs");
  return j;
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  SetterMap refine = {{"window_size", set(c.refine.window_size)},
                      {"stride", set(c.refine.stride)},
                      {"min_floor_vertices", set(c.refine.min_floor_vertices)},
                      {"icp_iterations", set(c.refine.icp_iterations)},
                      {"convergence_eps", set(c.refine.convergence_eps)},
                      {"max_rotation", set(c.refine.max_rotation)},
                      {"max_passes", set(c.refine.max_passes)},
                      {"pass_tolerance", set(c.refine.pass_tolerance)}};
  SetterMap pen = {{"voxel_size", set(c.penetration.voxel_size)},
                   {"region_radius", set(c.penetration.region_radius)},
                   {"clip_to_scene", set(c.penetration.clip_to_scene)},
                   {"cell_budget", set(c.penetration.cell_budget)}};
  SetterMap aug = {{"sample_count", set(c.augment.sample_count)},
                   {"radius", set(c.augment.radius)},
                   {"height_band", set(c.augment.height_band)},
                   {"cuboid", [&](const json& v) { c.augment.cuboid = vec_from(v, "augment.cuboid"); }},
                   {"output_count", set(c.augment.output_count)},
                   {"ground_min", set(c.augment.ground_min)},
                   {"ground_max", set(c.augment.ground_max)}};
  SetterMap walk = {{"yaw_count", set(c.walk.yaw_count)},
                    {"translation_step", set(c.walk.translation_step)},
                    {"reach_max", set(c.walk.reach_max)},
                    {"capsule_radius", set(c.walk.capsule_radius)}};
  SetterMap place = {{"reach_max", set(c.placement.reach_max)},
                     {"up_threshold", set(c.placement.up_threshold)}};
  SetterMap top = {{"seed", set(c.seed)},
                   {"jobs", set(c.jobs)},
                   {"floor_label", set(c.floor_label)},
                   {"contact_threshold", set(c.contact_threshold)},
                   {"refine", [&](const json& v) { read_section(v, "refine", refine); }},
                   {"penetration", [&](const json& v) { read_section(v, "penetration", pen); }},
                   {"augment", [&](const json& v) { read_section(v, "augment", aug); }},
                   {"walk", [&](const json& v) { read_section(v, "walk", walk); }},
                   {"placement", [&](const json& v) { read_section(v, "placement", place); }}};
  read_section(j, "config", top);
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

// ---- manifests -------------------------------------------------------------

json pose_to_json(const RigidTransform& t) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r)
    rows.push_back({t.rotation()(r, 0), t.rotation()(r, 1), t.rotation()(r, 2)});
  return {{"rotation", rows}, {"translation", vec_json(t.translation())}};
}

RigidTransform pose_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("pose must be an object");
  Mat3 r = Mat3::Identity();
  if (j.contains("rotation")) {
    const json& rows = j.at("rotation");
    if (!rows.is_array() || rows.size() != 3) throw ValidationError("pose rotation must be 3x3");
    for (int i = 0; i < 3; ++i) {
      if (!rows[i].is_array() || rows[i].size() != 3)
        throw ValidationError("pose rotation must be 3x3");
      for (int k = 0; k < 3; ++k) r(i, k) = rows[i][k].get<double>();
    }
  }
  Vec3 t = Vec3::Zero();
  if (j.contains("translation")) {
    const json& v = j.at("translation");
    if (!v.is_array() || v.size() != 3) throw ValidationError("pose translation must have 3 values");
    t = Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }
  RigidTransform out(r, t);
  out.validate(1e-6);
  return out;
}

namespace {

std::string rel(const fs::path& p, const fs::path& base) {
  if (p.empty()) return {};
  return p.lexically_relative(base).generic_string();
}

std::vector<fs::path> path_list(const json& j, const fs::path& base, const std::string& key) {
  std::vector<fs::path> out;
  if (j.is_string()) {
    out.push_back(base / j.get<std::string>());
  } else if (j.is_array()) {
    for (const auto& e : j) out.push_back(base / e.get<std::string>());
  } else {
    throw ValidationError("manifest field '" + key + "' must be a path or a list of paths");
  }
  return out;
}

SampleSpec parse_sample(const json& s, const fs::path& base) {
  if (!s.is_object()) throw ValidationError("manifest samples must be objects");
  SampleSpec out;
  auto str = [&](const char* key) -> std::string {
    if (!s.contains(key) || !s.at(key).is_string())
      throw ValidationError(std::string("manifest sample is missing '") + key + "'");
    return s.at(key).get<std::string>();
  };
  out.id = str("id");
  if (out.id.empty() || out.id.find_first_of("/\\") != std::string::npos || out.id == "." ||
      out.id == "..")
    throw ValidationError("sample id '" + out.id + "' is not a plain file name");
  out.scene = base / str("scene");
  out.labels = base / str("labels");
  out.object = base / str("object");
  out.part_map = base / str("part_map");
  if (s.contains("receptacle_label")) out.receptacle_label = str("receptacle_label");
  if (s.contains("trajectory")) out.trajectory = base / str("trajectory");
  if (s.contains("object_pose")) out.object_pose = pose_from_json(s.at("object_pose"));
  if (s.contains("grid")) out.grid = base / str("grid");
  if (s.contains("body_frames"))
    out.body_frames = path_list(s.at("body_frames"), base, "body_frames");
  else if (s.contains("body_frame"))
    out.body_frames = path_list(s.at("body_frame"), base, "body_frame");
  if (out.body_frames.empty()) throw ValidationError("sample " + out.id + " has no body frames");
  if (s.contains("gt_contacts")) out.gt_contacts = path_list(s.at("gt_contacts"), base, "gt_contacts");
  if (!out.gt_contacts.empty() && out.gt_contacts.size() != out.body_frames.size())
    throw ValidationError("sample " + out.id + ": gt_contacts must list one file per body frame");
  return out;
}

// Missing inputs fail their own sample rather than the whole manifest.
void require_inputs(const SampleSpec& s, bool need_trajectory) {
  std::vector<fs::path> paths = {s.scene, s.labels, s.object, s.part_map};
  if (need_trajectory) {
    if (s.trajectory.empty()) throw ValidationError("sample " + s.id + " has no trajectory");
    paths.push_back(s.trajectory);
  }
  paths.insert(paths.end(), s.body_frames.begin(), s.body_frames.end());
  paths.insert(paths.end(), s.gt_contacts.begin(), s.gt_contacts.end());
  if (s.grid) paths.push_back(*s.grid);
  for (const auto& p : paths)
    if (!fs::is_regular_file(p)) throw ValidationError("missing input file: " + p.string());
}

}  // namespace

json SampleSpec::to_json(const fs::path& base) const {
  json j = {{"id", id},
            {"scene", rel(scene, base)},
            {"labels", rel(labels, base)},
            {"receptacle_label", receptacle_label},
            {"object", rel(object, base)},
            {"part_map", rel(part_map, base)}};
  if (!trajectory.empty()) j["trajectory"] = rel(trajectory, base);
  if (object_pose) j["object_pose"] = pose_to_json(*object_pose);
  if (grid) j["grid"] = rel(*grid, base);
  j["body_frames"] = json::array();
  for (const auto& p : body_frames) j["body_frames"].push_back(rel(p, base));
  j["gt_contacts"] = json::array();
  for (const auto& p : gt_contacts) j["gt_contacts"].push_back(rel(p, base));
  return j;
}

DatasetManifest DatasetManifest::load(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("manifest " + path.string() + ": " + e.what());
  }
  const json* samples = &j;
  if (j.is_object()) {
    if (!j.contains("samples")) throw ConfigError("manifest has no 'samples' array");
    samples = &j.at("samples");
  }
  if (!samples->is_array()) throw ConfigError("manifest samples must be an array");
  DatasetManifest m;
  m.base_dir = path.parent_path();
  std::set<std::string> seen;
  try {
    for (const auto& s : *samples) {
      m.samples.push_back(parse_sample(s, m.base_dir));
      if (!seen.insert(m.samples.back().id).second)
        throw ValidationError("duplicate sample id '" + m.samples.back().id + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError("manifest " + path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError("manifest " + path.string() + ": " + e.what());
  }
  return m;
}

void DatasetManifest::save(const fs::path& path) const {
  json arr = json::array();
  for (const auto& s : samples) arr.push_back(s.to_json(path.parent_path()));
  write_atomically(path, json{{"samples", arr}}.dump(2) + "\n");
}

// ---- run -------------------------------------------------------------------

namespace {

json stats_json(const FloorStats& s) {
  return {{"count", s.count},
          {"mean_abs_dev", s.mean_abs_dev},
          {"std_dev", s.std_dev},
          {"signed_mean", s.signed_mean},
          {"window_avg_mean_abs_dev", s.window_avg_mean_abs_dev},
          {"window_avg_std_dev", s.window_avg_std_dev}};
}

std::string frame_id(const SampleSpec& s, std::size_t k) {
  return s.body_frames.size() == 1 ? s.id : s.id + "/" + std::to_string(k);
}

struct FrameInputs {
  BodyFrame body;
  GroundTruthContacts gt;
};

FrameInputs load_frame(const SampleSpec& s, std::size_t k, const PartMap& parts) {
  FrameInputs f;
  const TriMesh m = load_mesh(s.body_frames[k]);
  f.body = make_body_frame(m.vertices, parts);
  if (!s.gt_contacts.empty()) f.gt = load_gt_contacts(s.gt_contacts[k]);
  return f;
}

// Evaluates every frame; any frame failure fails the whole sample.
std::vector<MetricsReport> evaluate_frames(const SampleSpec& s, const std::vector<FrameInputs>& frames,
                                           const VoxelGrid& grid, const TriMesh& object,
                                           double threshold) {
  std::vector<MetricsReport> out;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    FrameAssets assets;
    assets.occupancy = &grid;
    assets.object = &object;
    assets.gt_object = frames[k].gt.object;
    assets.gt_floor = frames[k].gt.floor;
    assets.contact_threshold = threshold;
    FrameOutcome o = evaluate_frame(frame_id(s, k), frames[k].body, assets);
    if (!o.ok()) throw Error("frame " + std::to_string(k) + ": " + o.failure);
    out.push_back(*o.report);
  }
  return out;
}

fs::path sample_manifest_path(const fs::path& out, const std::string& id) {
  return out / "samples" / (id + ".json");
}

void write_json_file(const fs::path& path, const json& j) {
  write_atomically(path, j.dump(2) + "\n");
}

void write_aggregates(const fs::path& out, const std::vector<MetricsReport>& reports,
                      std::size_t failed, const std::string& method, const json& header) {
  std::string lines;
  for (const auto& r : reports) {
    json j = header;
    j["report"] = r.to_json();
    lines += j.dump() + "\n";
  }
  write_atomically(out / "reports.jsonl", lines);
  if (reports.empty()) {
    fs::remove(out / "aggregate.csv");
    fs::remove(out / "aggregate.txt");
    return;
  }
  const AggregateRow row = aggregate(reports, method, failed);
  write_atomically(out / "aggregate.csv", render_csv({row}));
  write_atomically(out / "aggregate.txt", render_table({row}));
}

}  // namespace

json process_sample(const SampleSpec& spec, const PipelineConfig& cfg, const fs::path& out_dir) {
  require_inputs(spec, true);
  const std::uint64_t seed = derive_seed(cfg.seed, spec.id);
  const LabelTable labels = load_label_table(spec.labels);
  const TriMesh scene = load_mesh(spec.scene, &labels);
  const int floor = require_label(labels, cfg.floor_label);
  const int receptacle = require_label(labels, spec.receptacle_label);

  // 1. floor refinement
  const RefineResult refined = refine_scene(scene, floor, cfg.refine);
  const SceneContext ctx = SceneContext::build(refined.scene, floor, receptacle, cfg.penetration);

  // 2. walk alignment
  const Trajectory traj = load_trajectory(spec.trajectory);
  const WalkAlignment walk = align_walk(traj, ctx, cfg.walk);
  const Vec3 end = walk.transform.apply(traj.pelvis.back());
  Trajectory aligned = traj;
  for (Vec3& p : aligned.pelvis) p = walk.transform.apply(p);

  // 3. object placement
  const TriMesh object = load_mesh(spec.object);
  const PlacementResult place = place_object(ctx, end, object, cfg.placement);
  const TriMesh placed = apply_transform(object, place.pose);
  const Vec3 object_center = placed.bounds().center();

  // 4. pelvis augmentation, targets kept ahead of the walk
  const AugmentResult aug = augment_pelvis(ctx.occupancy, ctx.receptacle.bounds(), object_center,
                                           end, cfg.augment, seed);
  const Vec3 walk_dir = walk.transform.rotation() * traj.walk_direction();
  json candidates = json::array();
  for (const auto& c : aug.candidates)
    candidates.push_back(
        {{"position", vec_json(c.position)},
         {"facing", vec_json(c.facing)},
         {"grasp_target", vec_json(forward_grasp_target(end, walk_dir, c.position, object_center,
                                                        cfg.augment.radius))}});

  // 5. evaluation of the provided grasp frames. They are authored in the
  // trajectory's frame, so they turn with the walk about the object's
  // vertical axis and then move with it.
  const PartMap parts = load_part_map(spec.part_map);
  const Vec3 source_center = object.bounds().center();
  const RigidTransform frame_pose =
      RigidTransform::translation_only(object_center)
          .compose(RigidTransform(rotation_z(walk.yaw), Vec3::Zero()))
          .compose(RigidTransform::translation_only(-source_center));
  std::vector<FrameInputs> frames;
  for (std::size_t k = 0; k < spec.body_frames.size(); ++k) {
    frames.push_back(load_frame(spec, k, parts));
    for (Vec3& v : frames.back().body.vertices) v = frame_pose.apply(v);
    frames.back().body.pelvis = frame_pose.apply(frames.back().body.pelvis);
  }
  const Aabb region = penetration_region(object_center, ctx.bounds, cfg.penetration);
  const VoxelGrid grid = scene_occupancy(ctx.scene, floor, region, cfg.penetration);
  const auto reports = evaluate_frames(spec, frames, grid, placed, cfg.contact_threshold);

  // Outputs: data files first, the sample manifest last as the commit.
  const fs::path dir = out_dir / spec.id;
  fs::create_directories(dir);
  const std::string ply_tmp = (dir / "scene_refined.ply.tmp").string();
  write_ply(ply_tmp, refined.scene);
  fs::rename(ply_tmp, dir / "scene_refined.ply");
  const std::string obj_tmp = (dir / "object_placed.obj.tmp").string();
  write_obj(obj_tmp, placed);
  fs::rename(obj_tmp, dir / "object_placed.obj");
  const std::string traj_tmp = (dir / "trajectory_aligned.json.tmp").string();
  write_trajectory(traj_tmp, aligned);
  fs::rename(traj_tmp, dir / "trajectory_aligned.json");

  json report_list = json::array();
  for (const auto& r : reports) report_list.push_back(r.to_json());
  std::size_t fitted = 0;
  for (const auto& w : refined.windows) fitted += w.fitted ? 1 : 0;

  json manifest = {
      {"id", spec.id},
      {"seed", seed},
      {"config", cfg.snapshot()},
      {"outputs",
       {{"scene", spec.id + "/scene_refined.ply"},
        {"object", spec.id + "/object_placed.obj"},
        {"trajectory", spec.id + "/trajectory_aligned.json"}}},
      {"refine",
       {{"before", stats_json(refined.before)},
        {"after", stats_json(refined.after)},
        {"windows", refined.windows.size()},
        {"windows_fitted", fitted},
        {"passes", refined.passes_applied}}},
      {"alignment",
       {{"yaw", walk.yaw},
        {"translation", vec_json(walk.translation)},
        {"final_distance", walk.final_distance},
        {"end_pelvis", vec_json(end)},
        {"candidates", walk.candidates},
        {"feasible", walk.feasible}}},
      {"placement",
       {{"receptacle_label", spec.receptacle_label},
        {"pose", pose_to_json(place.pose)},
        {"support_point", vec_json(place.support_point)},
        {"support_vertex", place.support_vertex}}},
      {"augment", aug.report()},
      {"pelvis_candidates", candidates},
      // Learned stages are not run here: the provided body frames stand in
      // for their output.
      {"stages",
       {{"grasp", {{"source", "provided"}, {"frames", spec.body_frames.size()}}},
        {"motion_infill", {{"source", "provided"}}}}},
      {"reports", report_list}};
  write_json_file(sample_manifest_path(out_dir, spec.id), manifest);
  return manifest;
}

RunSummary run_pipeline(const DatasetManifest& dataset, const PipelineConfig& cfg,
                        const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir / "samples");
  fs::create_directories(out_dir / "failures");

  RunSummary summary;
  std::vector<const SampleSpec*> pending;
  for (const auto& s : dataset.samples) {
    if (fs::exists(sample_manifest_path(out_dir, s.id))) {
      ++summary.skipped;
      log_event(LogLevel::Info, "sample already complete", {{"id", s.id}});
    } else {
      pending.push_back(&s);
    }
  }

  std::vector<std::string> errors(pending.size());
  auto run_one = [&](std::size_t n) {
    const SampleSpec& s = *pending[n];
    const fs::path failure = out_dir / "failures" / (s.id + ".json");
    try {
      log_event(LogLevel::Info, "sample start", {{"id", s.id}});
      process_sample(s, cfg, out_dir);
      std::error_code ec;
      fs::remove(failure, ec);
      log_event(LogLevel::Info, "sample done", {{"id", s.id}});
    } catch (const std::exception& e) {
      errors[n] = e.what();
      log_event(LogLevel::Error, "sample failed", {{"id", s.id}, {"error", e.what()}});
      try {
        write_json_file(failure, {{"id", s.id}, {"error", e.what()}});
      } catch (const std::exception&) {
      }
    }
  };
  const auto total = static_cast<long long>(pending.size());
  if (cfg.jobs == 1) {
    for (long long n = 0; n < total; ++n) run_one(static_cast<std::size_t>(n));
  } else {
#pragma omp parallel for num_threads(cfg.jobs) schedule(dynamic, 1)
    for (long long n = 0; n < total; ++n) run_one(static_cast<std::size_t>(n));
  }

  for (std::size_t n = 0; n < pending.size(); ++n) {
    if (errors[n].empty()) {
      ++summary.processed;
    } else {
      ++summary.failed;
      summary.failed_ids.push_back(pending[n]->id);
    }
  }

  // Aggregates are rebuilt from every committed sample, in manifest order.
  std::vector<MetricsReport> reports;
  std::size_t missing = 0;
  for (const auto& s : dataset.samples) {
    const fs::path p = sample_manifest_path(out_dir, s.id);
    if (!fs::exists(p)) {
      ++missing;
      continue;
    }
    const json m = json::parse(read_file(p));
    for (const auto& r : m.at("reports")) reports.push_back(MetricsReport::from_json(r));
  }
  write_aggregates(out_dir, reports, missing, "pipeline", {{"config", cfg.snapshot()}});
  log_event(LogLevel::Info, "run finished",
            {{"processed", summary.processed},
             {"skipped", summary.skipped},
             {"failed", summary.failed}});
  return summary;
}

EvalSummary evaluate_dataset(const DatasetManifest& dataset, const PipelineConfig& cfg,
                             const fs::path& out_dir, const std::string& method) {
  cfg.validate();
  fs::create_directories(out_dir);
  EvalSummary out;
  std::size_t failed_frames = 0;
  for (const auto& s : dataset.samples) {
    try {
      require_inputs(s, false);
      const LabelTable labels = load_label_table(s.labels);
      const TriMesh scene = load_mesh(s.scene, &labels);
      const std::optional<int> floor = find_label(labels, cfg.floor_label);
      const TriMesh object = apply_transform(load_mesh(s.object),
                                             s.object_pose.value_or(RigidTransform::identity()));
      VoxelGrid grid;
      if (s.grid) {
        grid = read_grid(*s.grid);
        if (!grid.filled()) grid = downward_fill(grid);
      } else {
        const Aabb region = penetration_region(object.bounds().center(), scene.bounds(), cfg.penetration);
        grid = scene_occupancy(scene, floor, region, cfg.penetration);
      }
      const PartMap parts = load_part_map(s.part_map);
      for (std::size_t k = 0; k < s.body_frames.size(); ++k) {
        FrameAssets assets;
        FrameInputs f;
        try {
          f = load_frame(s, k, parts);
        } catch (const std::exception& e) {
          out.failures.emplace_back(frame_id(s, k), e.what());
          ++failed_frames;
          continue;
        }
        assets.occupancy = &grid;
        assets.object = &object;
        assets.gt_object = f.gt.object;
        assets.gt_floor = f.gt.floor;
        assets.contact_threshold = cfg.contact_threshold;
        FrameOutcome o = evaluate_frame(frame_id(s, k), f.body, assets);
        if (o.ok()) {
          out.reports.push_back(*o.report);
        } else {
          out.failures.emplace_back(frame_id(s, k), o.failure);
          ++failed_frames;
        }
      }
    } catch (const std::exception& e) {
      out.failures.emplace_back(s.id, e.what());
      failed_frames += s.body_frames.size();
    }
  }
  for (const auto& [id, why] : out.failures)
    log_event(LogLevel::Error, "frame failed", {{"id", id}, {"error", why}});
  write_aggregates(out_dir, out.reports, failed_frames, method, {{"config", cfg.snapshot()}});
  if (!out.reports.empty()) out.row = aggregate(out.reports, method, failed_frames);
  return out;
}

}  // namespace scenegrasp
