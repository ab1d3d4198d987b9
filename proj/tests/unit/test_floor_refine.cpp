#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "scenegrasp/errors.hpp"
#include "scenegrasp/fixtures.hpp"
#include "scenegrasp/floor_refine.hpp"
#include "scenegrasp/shapes.hpp"
#include "test_util.hpp"

using namespace scenegrasp;

namespace {

constexpr int kFloor = 1, kTable = 3;

std::vector<Vec3> plane_points(double size, double step, const RigidTransform& t) {
  std::vector<Vec3> pts;
  for (double x = 0; x <= size + 1e-9; x += step)
    for (double y = 0; y <= size + 1e-9; y += step) pts.push_back(t.apply(Vec3(x - 0.5 * size, y - 0.5 * size, 0)));
  return pts;
}

TriMesh floor_with_table(const std::function<double(double, double)>& height) {
  return merge({shapes::height_field(0, 0, 3, 2, 0.1, height, kFloor),
                shapes::box(Vec3(1, 0.5, 0), Vec3(1.8, 1.2, 0.75), kTable)});
}

double abs_mean(const std::vector<double>& z) {
  double s = 0;
  for (double v : z) s += std::abs(v);
  return s / static_cast<double>(z.size());
}

}  // namespace

TEST_CASE("extract_floor_vertices") {
  const TriMesh all = shapes::height_field(0, 0, 1, 1, 0.25, [](double, double) { return 0.0; }, kFloor);
  CHECK(extract_floor_vertices(all, kFloor).size() == all.vertices.size());
  CHECK_THROWS_AS(extract_floor_vertices(all, kTable), ValidationError);

  const TriMesh mixed = merge({shapes::height_field(0, 0, 1, 1, 1.0, [](double, double) { return 0.0; }, kFloor),
                               shapes::box(Vec3(2, 2, 0), Vec3(3, 3, 1), kTable)});
  CHECK(extract_floor_vertices(mixed, kFloor) == std::vector<std::uint32_t>{0, 1, 2, 3});
}

TEST_CASE("fit_window_transform: identity, pure offset, tilt") {
  RefineConfig cfg;
  const auto flat = plane_points(1.0, 0.1, RigidTransform::identity());
  auto id = fit_window_transform(flat, cfg);
  REQUIRE(id);
  CHECK(std::abs(id->t_z) < 1e-9);
  CHECK(std::abs(id->r_x) < 1e-9);
  CHECK(std::abs(id->r_y) < 1e-9);

  const auto raised = plane_points(1.0, 0.1, RigidTransform::translation_only(Vec3(0, 0, 0.1175)));
  auto off = fit_window_transform(raised, cfg);
  REQUIRE(off);
  CHECK(off->t_z == doctest::Approx(-0.1175).epsilon(1e-12));
  CHECK(std::abs(off->r_x) < 1e-9);
  CHECK(std::abs(off->r_y) < 1e-9);

  const double two_deg = 2.0 * std::numbers::pi / 180.0;
  const RigidTransform inject(rotation_x(two_deg), Vec3(0, 0, 0.05));
  const auto tilted = plane_points(1.0, 0.1, inject);
  auto tilt = fit_window_transform(tilted, cfg);
  REQUIRE(tilt);
  CHECK(std::abs(tilt->r_x + two_deg) < 1e-4);
  CHECK(std::abs(tilt->t_z + 0.05) < 1e-4);
  std::vector<double> z;
  for (const Vec3& p : tilted) z.push_back(tilt->apply(p).z());
  CHECK(abs_mean(z) < 1e-6);
}

TEST_CASE("fit_window_transform: too few points and rotation cap") {
  RefineConfig cfg;
  const auto few = plane_points(1.0, 0.2, RigidTransform::identity());  // 36 points
  CHECK_FALSE(fit_window_transform(few, cfg).has_value());
  const auto steep = plane_points(1.0, 0.1, RigidTransform(rotation_y(0.5), Vec3::Zero()));
  CHECK_FALSE(fit_window_transform(steep, cfg).has_value());
  cfg.max_rotation = 0.6;
  CHECK(fit_window_transform(steep, cfg).has_value());
}

TEST_CASE("refine_scene: already flat scene is unchanged") {
  const TriMesh scene = floor_with_table([](double, double) { return 0.0; });
  const RefineResult r = refine_scene(scene, kFloor);
  for (std::size_t i = 0; i < scene.vertices.size(); ++i)
    CHECK((r.scene.vertices[i] - scene.vertices[i]).norm() < 1e-9);
  CHECK(r.before.mean_abs_dev == 0.0);
  CHECK(r.after.mean_abs_dev < 1e-12);
}

TEST_CASE("refine_scene: piecewise ramp floor") {
  // Offset 0.12 with a kink in slope at x = 1.5.
  auto ramp = [](double x, double) { return 0.12 + (x < 1.5 ? 0.02 * x : 0.03 + 0.005 * (x - 1.5)); };
  const TriMesh scene = floor_with_table(ramp);
  const RefineResult r = refine_scene(scene, kFloor);
  CHECK(r.before.mean_abs_dev >= 0.12);
  CHECK(r.after.mean_abs_dev <= 0.005);
}

TEST_CASE("refine_scene: one window equals a direct fit") {
  const RigidTransform inject(rotation_y(0.02) * rotation_x(-0.03), Vec3(0, 0, 0.07));
  TriMesh scene = shapes::height_field(0, 0, 0.9, 0.9, 0.05, [](double, double) { return 0.0; }, kFloor);
  scene = apply_transform(scene, inject);
  const RefineResult r = refine_scene(scene, kFloor);
  REQUIRE(r.windows.size() == 1);
  const auto fit = fit_window_transform(scene.vertices, RefineConfig{});
  REQUIRE(fit);
  for (std::size_t i = 0; i < scene.vertices.size(); ++i)
    CHECK((r.scene.vertices[i] - fit->apply(scene.vertices[i])).norm() < 1e-9);
}

TEST_CASE("floor_stats: examples and recomputation oracle") {
  const TriMesh flat = shapes::height_field(0, 0, 2, 2, 0.1, [](double, double) { return 0.0; }, kFloor);
  const FloorStats f = floor_stats(flat, kFloor);
  CHECK(f.mean_abs_dev == 0.0);
  CHECK(f.std_dev == 0.0);

  TriMesh split = flat;
  for (Vec3& v : split.vertices) v.z() = v.x() < 0.95 ? 0.1 : -0.1;
  // 10 of 21 columns at +0.1, 11 at -0.1: mean |z| is 0.1, std is
  // 0.1·sqrt(1 - (1/21)^2).
  const FloorStats s = floor_stats(split, kFloor);
  CHECK(s.mean_abs_dev == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(s.std_dev == doctest::Approx(0.1 * std::sqrt(1.0 - 1.0 / 441.0)).epsilon(1e-12));

  std::mt19937_64 g(42);
  TriMesh noisy = flat;
  for (Vec3& v : noisy.vertices) v.z() = testing::uniform(g, -0.2, 0.3);
  const FloorStats n = floor_stats(noisy, kFloor);
  double sum_abs = 0, sum = 0;
  for (const Vec3& v : noisy.vertices) {
    sum_abs += std::abs(v.z());
    sum += v.z();
  }
  const double cnt = static_cast<double>(noisy.vertices.size());
  const double mean = sum / cnt;
  double ss = 0;
  for (const Vec3& v : noisy.vertices) ss += (v.z() - mean) * (v.z() - mean);
  CHECK(std::abs(n.mean_abs_dev - sum_abs / cnt) < 1e-12);
  CHECK(std::abs(n.signed_mean - mean) < 1e-12);
  CHECK(std::abs(n.std_dev - std::sqrt(ss / cnt)) < 1e-12);
  CHECK(n.count == noisy.vertices.size());
  for (const auto& w : n.per_window) CHECK(w.mean_abs_dev >= 0.0);
}

TEST_CASE("properties: monotone, idempotent, locally rigid, continuous") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    CAPTURE(seed);
    const RoomFixture fx = make_room(seed, true);
    const RefineConfig cfg;
    const RefineResult r = refine_scene(fx.scene, kFloor, cfg);
    CHECK(r.after.mean_abs_dev <= r.before.mean_abs_dev);

    const RefineResult again = refine_scene(r.scene, kFloor, cfg);
    CHECK(std::abs(again.after.mean_abs_dev - r.after.mean_abs_dev) < 1e-6);
    CHECK(r.passes_applied >= 1);

    // Core cells are stride squares anchored at the floor's x-y minimum.
    const auto ids = extract_floor_vertices(fx.scene, kFloor);
    Aabb fb = Aabb::of(std::vector<Vec3>{fx.scene.vertices[ids.front()]});
    for (auto v : ids) {
      fb.min = fb.min.cwiseMin(fx.scene.vertices[v]);
      fb.max = fb.max.cwiseMax(fx.scene.vertices[v]);
    }
    const int cx = std::max(1, static_cast<int>(std::ceil(fb.extent().x() / cfg.stride - 1e-12)));
    const int cy = std::max(1, static_cast<int>(std::ceil(fb.extent().y() / cfg.stride - 1e-12)));
    std::map<std::pair<int, int>, std::vector<std::uint32_t>> cells;
    for (std::uint32_t v = 0; v < fx.scene.vertices.size(); ++v) {
      const Vec3& p = fx.scene.vertices[v];
      const int i = std::clamp(static_cast<int>(std::floor((p.x() - fb.min.x()) / cfg.stride)), 0, cx - 1);
      const int j = std::clamp(static_cast<int>(std::floor((p.y() - fb.min.y()) / cfg.stride)), 0, cy - 1);
      cells[{i, j}].push_back(v);
    }
    for (const auto& [key, members] : cells)
      for (std::size_t a = 0; a < members.size(); a += 3)
        for (std::size_t b = a + 1; b < members.size(); b += 5) {
          const double before = (fx.scene.vertices[members[a]] - fx.scene.vertices[members[b]]).norm();
          const double after = (r.scene.vertices[members[a]] - r.scene.vertices[members[b]]).norm();
          CHECK(std::abs(before - after) < 1e-9);
        }

    // Displacement differences are bounded, pass by pass, by the spread of
    // that pass's window transforms plus its rotation acting on the
    // separation. Later passes see points moved by millimetres, covered by
    // the small extra slack.
    std::vector<const std::vector<WindowTransform>*> passes = {&r.windows};
    for (const auto& p : r.later_passes) passes.push_back(&p);
    passes.resize(static_cast<std::size_t>(r.passes_applied));
    std::mt19937_64 g(seed);
    for (int t = 0; t < 300; ++t) {
      const auto u = static_cast<std::uint32_t>(g() % ids.size());
      const auto v = static_cast<std::uint32_t>(g() % ids.size());
      const Vec3& pu = fx.scene.vertices[ids[u]];
      const Vec3& pv = fx.scene.vertices[ids[v]];
      if ((pu - pv).norm() >= cfg.window_size) continue;
      double bound = 0.0;
      for (const auto* ws : passes) {
        double max_angle_spread = 0.0, max_rot = 0.0, spread = 0.0;
        for (const auto& a : *ws) {
          max_rot = std::max(max_rot, (a.rigid().rotation() - Mat3::Identity()).norm());
          for (const auto& b : *ws) {
            max_angle_spread = std::max({max_angle_spread, std::abs(a.r_x - b.r_x), std::abs(a.r_y - b.r_y)});
            spread = std::max(spread, (a.apply(pu) - b.apply(pu)).norm());
          }
        }
        bound += spread + max_rot * (pu - pv).norm() + max_angle_spread * max_angle_spread * pu.norm() +
                 0.01 * max_angle_spread + 1e-9;
      }
      const Vec3 du = r.scene.vertices[ids[u]] - pu;
      const Vec3 dv = r.scene.vertices[ids[v]] - pv;
      CHECK((du - dv).norm() <= bound);
    }
  }
}

TEST_CASE("config validation") {
  RefineConfig cfg;
  cfg.stride = 2.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.window_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
