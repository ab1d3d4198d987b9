#include "scenegrasp/fixtures.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "scenegrasp/contact_eval.hpp"
#include "scenegrasp/errors.hpp"
#include "scenegrasp/floor_refine.hpp"
#include "scenegrasp/io_util.hpp"
#include "scenegrasp/mesh_io.hpp"
#include "scenegrasp/pipeline.hpp"
#include "scenegrasp/rng.hpp"
#include "scenegrasp/scene_synth.hpp"
#include "scenegrasp/shapes.hpp"

namespace scenegrasp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFloor = 1, kWall = 2, kTable = 3;

struct KindName {
  FixtureKind kind;
  const char* name;
};
constexpr KindName kKinds[] = {{FixtureKind::FlatRoom, "flat-room"},
                               {FixtureKind::WarpedFloor, "warped-floor"},
                               {FixtureKind::TableScene, "table-scene"},
                               {FixtureKind::BoxedObject, "boxed-object"},
                               {FixtureKind::GradedPenetration, "graded-penetration"}};

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// Room shell: floor height field plus four thin walls just inside the
// footprint.
std::vector<TriMesh> room_parts(double w, double d) {
  const double t = 0.1, h = 2.4;
  return {shapes::height_field(0, 0, w, d, 0.1, [](double, double) { return 0.0; }, kFloor),
          shapes::box(Vec3(0, 0, 0), Vec3(t, d, h), kWall),
          shapes::box(Vec3(w - t, 0, 0), Vec3(w, d, h), kWall),
          shapes::box(Vec3(t, 0, 0), Vec3(w - t, t, h), kWall),
          shapes::box(Vec3(t, d - t, 0), Vec3(w - t, d, h), kWall)};
}

// Surface lattice of a box, used to build point-cloud bodies.
void add_box_points(BodyFrame& body, const Vec3& lo, const Vec3& hi, double spacing,
                    BodyPart part) {
  int n[3];
  for (int a = 0; a < 3; ++a)
    n[a] = std::max(1, static_cast<int>(std::ceil((hi[a] - lo[a]) / spacing - 1e-9)));
  for (int k = 0; k <= n[2]; ++k)
    for (int j = 0; j <= n[1]; ++j)
      for (int i = 0; i <= n[0]; ++i) {
        if (i != 0 && i != n[0] && j != 0 && j != n[1] && k != 0 && k != n[2]) continue;
        const Vec3 p(lo.x() + (hi.x() - lo.x()) * i / n[0], lo.y() + (hi.y() - lo.y()) * j / n[1],
                     lo.z() + (hi.z() - lo.z()) * k / n[2]);
        body.vertices.push_back(p);
        body.parts.push_back(part);
      }
}

void add_segment_points(BodyFrame& body, const Vec3& a, const Vec3& b, double spacing,
                        BodyPart part) {
  const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / spacing)));
  for (int i = 0; i <= n; ++i) {
    body.vertices.push_back(a + (b - a) * (static_cast<double>(i) / n));
    body.parts.push_back(part);
  }
}

// Standing body facing +x with its pelvis over (px, py); hands cup a
// sphere of radius r at `object` from both sides, 5 mm off its surface.
BodyFrame standing_body(double px, double py, double pelvis_z, const Vec3& object, double r) {
  BodyFrame b;
  const double s = 0.03;
  for (double side : {-1.0, 1.0}) {
    const double y0 = py + side * 0.1;
    add_box_points(b, Vec3(px - 0.05, y0 - 0.05, 0.0), Vec3(px + 0.2, y0 + 0.05, 0.06), s,
                   BodyPart::Foot);
    add_box_points(b, Vec3(px - 0.05, y0 - 0.05, 0.1), Vec3(px + 0.05, y0 + 0.05, 0.48), s,
                   BodyPart::LowerLeg);
    add_box_points(b, Vec3(px - 0.07, y0 - 0.07, 0.52), Vec3(px + 0.07, y0 + 0.07, pelvis_z - 0.1),
                   s, BodyPart::Other);
  }
  add_box_points(b, Vec3(px - 0.1, py - 0.17, pelvis_z - 0.08),
                 Vec3(px + 0.1, py + 0.17, pelvis_z + 0.08), s, BodyPart::Pelvis);
  add_box_points(b, Vec3(px - 0.1, py - 0.18, pelvis_z + 0.12), Vec3(px + 0.1, py + 0.18, pelvis_z + 0.55),
                 s, BodyPart::Other);
  add_box_points(b, Vec3(px - 0.08, py - 0.08, pelvis_z + 0.6), Vec3(px + 0.08, py + 0.08, pelvis_z + 0.8),
                 s, BodyPart::Other);
  for (double side : {-1.0, 1.0}) {
    const BodyPart hand = side < 0 ? BodyPart::HandRight : BodyPart::HandLeft;
    // Hand slab: inner face 5 mm outside the sphere, spanning its equator.
    const double inner = object.y() + side * (r + 0.005);
    const double outer = inner + side * 0.03;
    const Vec3 lo(object.x() - 0.04, std::min(inner, outer),
                  std::max(object.z() - 0.04, object.z() - r + 0.005));
    const Vec3 hi(object.x() + 0.04, std::max(inner, outer), object.z() + 0.04);
    add_box_points(b, lo, hi, 0.01, hand);
    const Vec3 shoulder(px, py + side * 0.22, pelvis_z + 0.5);
    const Vec3 wrist(object.x() - 0.05, 0.5 * (lo.y() + hi.y()), object.z());
    add_segment_points(b, shoulder, wrist, s, BodyPart::Other);
  }
  b.pelvis = Vec3(px, py, pelvis_z);
  return b;
}

PartMap part_map_of(const BodyFrame& body) {
  PartMap m;
  m.parts = body.parts;
  m.has_pelvis = true;
  m.pelvis = body.pelvis;
  return m;
}

TriMesh body_points_mesh(const BodyFrame& body) {
  TriMesh m;
  m.vertices = body.vertices;
  return m;
}

json stats_json(const FloorStats& s) {
  return {{"count", s.count},
          {"mean_abs_dev", s.mean_abs_dev},
          {"std_dev", s.std_dev},
          {"signed_mean", s.signed_mean}};
}

json contacts_json(const ContactSet& s) { return s.ids; }

void write_json(const fs::path& path, const json& j) { write_atomically(path, j.dump(2) + "\n"); }

// Files shared by the table-like kinds.
json write_table_files(const TableFixture& fx, const fs::path& dir) {
  fs::create_directories(dir);
  const LabelTable labels = fixture_labels();
  write_ply(dir / "scene.ply", fx.scene);
  write_label_table(dir / "labels.json", labels);
  write_obj(dir / "object.obj", fx.object);
  Trajectory traj;
  traj.pelvis = fx.trajectory;
  write_trajectory(dir / "trajectory.json", traj);
  write_obj(dir / "body_000.obj", body_points_mesh(fx.body));
  write_part_map(dir / "part_map.json", part_map_of(fx.body));
  GroundTruthContacts gt;
  gt.object = ContactSet::from_ids(ContactTarget::Object, fx.truth["contacts"]["object"]);
  gt.floor = ContactSet::from_ids(ContactTarget::Floor, fx.truth["contacts"]["floor"]);
  write_gt_contacts(dir / "gt_contacts_000.json", gt);
  write_json(dir / "truth.json", fx.truth);
  return fx.truth;
}

json sample_entry(const std::string& id, const std::string& prefix) {
  return {{"id", id},
          {"scene", prefix + "scene.ply"},
          {"labels", prefix + "labels.json"},
          {"receptacle_label", "table"},
          {"object", prefix + "object.obj"},
          {"trajectory", prefix + "trajectory.json"},
          {"body_frames", {prefix + "body_000.obj"}},
          {"part_map", prefix + "part_map.json"},
          {"gt_contacts", {prefix + "gt_contacts_000.json"}}};
}

bool representable(double ratio, std::size_t n) {
  const double k = ratio * static_cast<double>(n);
  return ratio >= 0.0 && ratio <= 1.0 && std::abs(k - std::round(k)) < 1e-9;
}

}  // namespace

FixtureKind fixture_kind_from_string(const std::string& name) {
  for (const auto& k : kKinds)
    if (name == k.name) return k.kind;
  throw ConfigError("unknown fixture kind '" + name + "'");
}

std::string to_string(FixtureKind kind) {
  for (const auto& k : kKinds)
    if (kind == k.kind) return k.name;
  return "?";
}

LabelTable fixture_labels() { return {{"floor", kFloor}, {"wall", kWall}, {"table", kTable}}; }

RoomFixture make_room(std::uint64_t seed, bool warped) {
  Rng rng(seed);
  const double w = 4.0 + 0.5 * static_cast<double>(rng.below(5));
  const double d = 4.0 + 0.5 * static_cast<double>(rng.below(5));
  const double sx = 0.8 + 0.1 * static_cast<double>(rng.below(5));
  const double sy = 0.6 + 0.1 * static_cast<double>(rng.below(4));
  const double h = 0.72 + 0.01 * static_cast<double>(rng.below(8));
  const double tx = w - 1.2 - sx;
  const double ty = 0.5 * d - 0.5 * sy + 0.1 * (static_cast<double>(rng.below(5)) - 2.0);

  std::vector<TriMesh> parts = room_parts(w, d);
  parts.push_back(shapes::block(tx, ty, tx + sx, ty + sy, 0.0, h, 0.05, kTable));
  RoomFixture out;
  out.scene = merge(parts);
  out.truth = {{"kind", warped ? "warped-floor" : "flat-room"},
               {"seed", seed},
               {"room", {w, d}},
               {"table", {{"min", {tx, ty, 0.0}}, {"max", {tx + sx, ty + sy, h}}}}};
  if (warped) {
    // Mostly a vertical offset, plus a mild tilt and a long-wavelength
    // ripple so windows see slightly different planes.
    const double base = rng.uniform(0.11, 0.14);
    const double ax = rng.uniform(-0.015, 0.015), ay = rng.uniform(-0.015, 0.015);
    const double amp = 0.01, wavelength = 4.0, phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    auto warp = [&](const Vec3& p) {
      return base + ax * (p.x() - 0.5 * w) + ay * (p.y() - 0.5 * d) +
             amp * std::sin(2.0 * std::numbers::pi * p.x() / wavelength + phase);
    };
    for (Vec3& v : out.scene.vertices) v.z() += warp(v);
    out.truth["warp"] = {{"offset", base},
                         {"slope", {ax, ay}},
                         {"ripple_amplitude", amp},
                         {"ripple_wavelength", wavelength},
                         {"ripple_phase", phase}};
  }
  out.truth["floor_before"] = stats_json(floor_stats(out.scene, kFloor));
  return out;
}

TableFixture make_table_scene(std::uint64_t seed) {
  Rng rng(seed);
  const double w = 4.0 + 0.5 * static_cast<double>(rng.below(5));
  const double d = 4.0 + 0.5 * static_cast<double>(rng.below(5));
  const double sx = 0.8 + 0.1 * static_cast<double>(rng.below(5));
  const double sy = 0.6 + 0.1 * static_cast<double>(rng.below(4));
  const double h = 0.72 + 0.01 * static_cast<double>(rng.below(8));
  const double tx = w - 1.2 - sx;
  const double ty = 0.5 * d - 0.5 * sy + 0.1 * (static_cast<double>(rng.below(5)) - 2.0);
  const double r = rng.uniform(0.03, 0.06);
  const double cy = ty + 0.5 * sy;

  std::vector<TriMesh> parts = room_parts(w, d);
  parts.push_back(shapes::block(tx, ty, tx + sx, ty + sy, 0.0, h, 0.05, kTable));

  TableFixture out;
  out.scene = merge(parts);
  const Vec3 center(tx + 0.15, cy, h + r);
  out.object = shapes::uv_sphere(center, r, 24, 12);

  // Straight walk along +x ending 0.35 m short of the table's near edge.
  const double pelvis_z = 0.9;
  const double x_start = 0.8, x_end = tx - 0.35;
  const int frames = 45;
  for (int f = 0; f < frames; ++f) {
    const double s = static_cast<double>(f) / (frames - 1);
    out.trajectory.emplace_back(x_start + (x_end - x_start) * s, cy,
                                pelvis_z + 0.01 * std::sin(4.0 * std::numbers::pi * s));
  }
  out.body = standing_body(x_end, cy, pelvis_z, center, r);
  const ContactSet obj = annotate_contacts(out.body, out.object);
  const ContactSet floor = floor_contacts(out.body);
  out.truth = {{"kind", "table-scene"},
               {"seed", seed},
               {"room", {w, d}},
               {"table", {{"min", {tx, ty, 0.0}}, {"max", {tx + sx, ty + sy, h}}}},
               {"object", {{"center", vec_json(center)}, {"radius", r}}},
               {"end_pelvis", vec_json(out.trajectory.back())},
               {"contacts", {{"object", contacts_json(obj)}, {"floor", contacts_json(floor)}}},
               {"scene_pen", 0.0},
               {"floor_pen", 0.0}};
  return out;
}

TableFixture make_boxed_object(std::uint64_t seed) {
  // A small table fenced in by walls 0.25 m from its edges: no standing
  // room anywhere within 1 m of the object.
  Rng rng(seed);
  const double half = 0.3, gap = 0.25, wall = 0.5;
  const double h = 0.72 + 0.01 * static_cast<double>(rng.below(8));
  const double r = rng.uniform(0.03, 0.05);
  const double c = half + gap + wall;  // table centre in both x and y
  const double inner = half + gap, outer = inner + wall;
  std::vector<TriMesh> parts = {
      shapes::height_field(0, 0, 2 * c, 2 * c, 0.1, [](double, double) { return 0.0; }, kFloor),
      shapes::block(c - half, c - half, c + half, c + half, 0.0, h, 0.05, kTable),
      shapes::box(Vec3(c - outer, c - outer, 0), Vec3(c - inner, c + outer, 2.2), kWall),
      shapes::box(Vec3(c + inner, c - outer, 0), Vec3(c + outer, c + outer, 2.2), kWall),
      shapes::box(Vec3(c - inner, c - outer, 0), Vec3(c + inner, c - inner, 2.2), kWall),
      shapes::box(Vec3(c - inner, c + inner, 0), Vec3(c + inner, c + outer, 2.2), kWall)};
  TableFixture out;
  out.scene = merge(parts);
  const Vec3 center(c, c, h + r);
  out.object = shapes::uv_sphere(center, r, 24, 12);
  out.trajectory = {Vec3(c - inner + 0.05, c, 0.9), Vec3(c - half - 0.05, c, 0.9)};
  out.body = standing_body(c - half - 0.12, c, 0.9, center, r);
  const ContactSet obj = annotate_contacts(out.body, out.object);
  const ContactSet floor = floor_contacts(out.body);
  out.truth = {{"kind", "boxed-object"},
               {"seed", seed},
               {"table", {{"min", {c - half, c - half, 0.0}}, {"max", {c + half, c + half, h}}}},
               {"object", {{"center", vec_json(center)}, {"radius", r}}},
               {"expected_augment_candidates", 0},
               {"contacts", {{"object", contacts_json(obj)}, {"floor", contacts_json(floor)}}}};
  return out;
}

GradedFixture make_graded_penetration(std::uint64_t seed, double scene_ratio, double floor_ratio) {
  constexpr std::size_t kBody = 10000, kFeet = 5000, kHands = 200, kLegs = 300;
  if (!representable(scene_ratio, kBody))
    throw ConfigError("scene ratio " + std::to_string(scene_ratio) + " is not a multiple of 1/10000");
  if (!representable(floor_ratio, kFeet))
    throw ConfigError("floor ratio " + std::to_string(floor_ratio) + " is not a multiple of 1/5000");
  const auto inside = static_cast<std::size_t>(std::llround(scene_ratio * kBody));
  const auto below = static_cast<std::size_t>(std::llround(floor_ratio * kFeet));
  constexpr std::size_t kOther = kBody - kFeet - kHands - kLegs;
  if (inside > kOther) throw ConfigError("scene ratio too large for the graded body");

  Rng rng(seed);
  GradedFixture out;
  // Table block on [1,2]×[0,1], top at 0.8; everything else is open floor.
  out.scene = merge({shapes::height_field(-1, -1, 3, 3, 0.1, [](double, double) { return 0.0; },
                                          kFloor),
                     shapes::block(1.0, 0.0, 2.0, 1.0, 0.0, 0.8, 0.05, kTable)});
  const double r = 0.05;
  const Vec3 center(1.5, 0.5, 0.8 + r);
  out.object = shapes::icosphere(center, r, 2);

  BodyFrame& b = out.body;
  auto push = [&](const Vec3& p, BodyPart part) {
    b.vertices.push_back(p);
    b.parts.push_back(part);
  };
  // Free space: the open strip x ∈ [-0.8, 0.6] (no scene geometry but the
  // excluded floor).
  auto free_point = [&](double z0, double z1) {
    return Vec3(rng.uniform(-0.8, 0.6), rng.uniform(-0.8, 2.8), rng.uniform(z0, z1));
  };
  for (std::size_t i = 0; i < kFeet; ++i) {
    Vec3 p = free_point(0.0, 0.015);
    if (i < below) p.z() = -0.01;
    push(p, BodyPart::Foot);
  }
  for (std::size_t i = 0; i < kLegs; ++i) push(free_point(0.1, 0.45), BodyPart::LowerLeg);
  // Hands on a shell 5-15 mm outside the object, upper half only so they
  // sit above the table top (and the grid).
  for (std::size_t i = 0; i < kHands; ++i) {
    Vec3 dir;
    do dir = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.3, 1));
    while (dir.norm() > 1.0 || dir.norm() < 0.3);
    push(center + dir.normalized() * (r + rng.uniform(0.005, 0.015)),
         i % 2 ? BodyPart::HandLeft : BodyPart::HandRight);
  }
  for (std::size_t i = 0; i < kOther; ++i) {
    if (i < inside)
      push(Vec3(rng.uniform(1.1, 1.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.7)),
           BodyPart::Other);
    else
      push(free_point(0.1, 1.5), BodyPart::Other);
  }
  b.pelvis = Vec3(-0.1, 1.0, 0.9);

  out.truth = {{"kind", "graded-penetration"},
               {"seed", seed},
               {"num_vertices", kBody},
               {"foot_vertices", kFeet},
               {"inside_vertices", inside},
               {"below_floor_vertices", below},
               {"scene_pen", static_cast<double>(inside) / kBody},
               {"floor_pen", static_cast<double>(below) / kFeet},
               {"object", {{"center", vec_json(center)}, {"radius", r}}}};
  return out;
}

json gen_fixtures(const FixtureOptions& opts, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const LabelTable labels = fixture_labels();
  switch (opts.kind) {
    case FixtureKind::FlatRoom:
    case FixtureKind::WarpedFloor: {
      const RoomFixture fx = make_room(opts.seed, opts.kind == FixtureKind::WarpedFloor);
      write_ply(out_dir / "scene.ply", fx.scene);
      write_label_table(out_dir / "labels.json", labels);
      write_json(out_dir / "truth.json", fx.truth);
      return fx.truth;
    }
    case FixtureKind::TableScene: {
      if (opts.count < 1) throw ConfigError("--count must be at least 1");
      json dataset = {{"samples", json::array()}};
      json truth = {{"kind", "table-scene"}, {"seed", opts.seed}, {"samples", json::array()}};
      for (int i = 0; i < opts.count; ++i) {
        char id_buf[32];
        std::snprintf(id_buf, sizeof id_buf, "sample_%03d", i);
        const std::string id = id_buf;
        const std::uint64_t s = derive_seed(opts.seed, id);
        const TableFixture fx = make_table_scene(s);
        json t = write_table_files(fx, out_dir / id);
        t["id"] = id;
        truth["samples"].push_back(t);
        dataset["samples"].push_back(sample_entry(id, id + "/"));
      }
      write_json(out_dir / "dataset.json", dataset);
      write_json(out_dir / "truth.json", truth);
      return truth;
    }
    case FixtureKind::BoxedObject: {
      const TableFixture fx = make_boxed_object(opts.seed);
      write_table_files(fx, out_dir);
      write_json(out_dir / "dataset.json",
                 {{"samples", json::array({sample_entry("boxed", "")})}});
      return fx.truth;
    }
    case FixtureKind::GradedPenetration: {
      const GradedFixture fx = make_graded_penetration(opts.seed, opts.scene_ratio, opts.floor_ratio);
      write_ply(out_dir / "scene.ply", fx.scene);
      write_label_table(out_dir / "labels.json", labels);
      write_obj(out_dir / "object.obj", fx.object);
      write_obj(out_dir / "body_000.obj", body_points_mesh(fx.body));
      write_part_map(out_dir / "part_map.json", part_map_of(fx.body));
      write_json(out_dir / "truth.json", fx.truth);
      json sample = {{"id", "graded"},
                     {"scene", "scene.ply"},
                     {"labels", "labels.json"},
                     {"receptacle_label", "table"},
                     {"object", "object.obj"},
                     {"object_pose", pose_to_json(RigidTransform::identity())},
                     {"body_frames", {"body_000.obj"}},
                     {"part_map", "part_map.json"}};
      write_json(out_dir / "eval.json", json::array({sample}));
      return fx.truth;
    }
  }
  throw ConfigError("unhandled fixture kind");
}

}  // namespace scenegrasp
