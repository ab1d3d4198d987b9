#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "bodies.hpp"
#include "oracles.hpp"
#include "scenegrasp/contact_eval.hpp"
#include "scenegrasp/errors.hpp"
#include "scenegrasp/fixtures.hpp"
#include "scenegrasp/penetration.hpp"
#include "scenegrasp/shapes.hpp"
#include "test_util.hpp"

using namespace scenegrasp;
using testing::add;
using testing::body_of;

namespace {

ContactSet obj_set(std::vector<std::uint32_t> ids) {
  return ContactSet::from_ids(ContactTarget::Object, std::move(ids));
}

std::vector<std::uint32_t> range(std::uint32_t a, std::uint32_t b) {
  std::vector<std::uint32_t> v(b - a + 1);
  std::iota(v.begin(), v.end(), a);
  return v;
}

VoxelGrid graded_grid(const GradedFixture& fx) {
  PenConfig pen;
  const Vec3 c = fx.object.bounds().center();
  return scene_occupancy(fx.scene, fixture_labels().at("floor"),
                         penetration_region(c, fx.scene.bounds(), pen), pen);
}

}  // namespace

TEST_CASE("annotate_contacts: strict threshold against a plane") {
  const TriMesh plane = shapes::height_field(-1, -1, 1, 1, 0.5, [](double, double) { return 0.0; });
  const BodyFrame b = body_of({Vec3(0, 0, 0.02), Vec3(0, 0, 0.0199), Vec3(0.3, 0.3, -0.01), Vec3(0, 0, 0.5)});
  const ContactSet c = annotate_contacts(b, plane);
  CHECK(c.ids == std::vector<std::uint32_t>{1, 2});
  CHECK(c.target == ContactTarget::Object);
  CHECK(annotate_contacts(b, plane, 0.6).size() == 4);
}

TEST_CASE("annotate_contacts matches a brute-force distance scan") {
  const TriMesh ball = shapes::icosphere(Vec3(0.2, -0.1, 0.5), 0.3, 2);
  std::mt19937_64 g(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 300; ++i) {
      Vec3 d = testing::random_point(g, -1, 1).normalized();
      pts.push_back(Vec3(0.2, -0.1, 0.5) + d * testing::uniform(g, 0.0, 0.4));
    }
    const double thr = testing::uniform(g, 0.005, 0.05);
    const ContactSet got = annotate_contacts(body_of(pts), ball, thr);
    std::vector<std::uint32_t> want;
    for (std::uint32_t i = 0; i < pts.size(); ++i)
      if (oracle::mesh_distance(ball, pts[i]) < thr) want.push_back(i);
    CHECK(got.ids == want);
  }
}

TEST_CASE("floor_contacts: feet and lower legs only") {
  BodyFrame b;
  add(b, Vec3(0, 0, 0.01), BodyPart::Foot);
  add(b, Vec3(0, 0, -0.015), BodyPart::Foot);
  add(b, Vec3(0, 0, 0.02), BodyPart::Foot);
  add(b, Vec3(0, 0, 0.005), BodyPart::LowerLeg);
  add(b, Vec3(0, 0, 0.0), BodyPart::HandLeft);
  add(b, Vec3(0, 0, 0.0), BodyPart::Other);
  const ContactSet c = floor_contacts(b);
  CHECK(c.target == ContactTarget::Floor);
  CHECK(c.ids == std::vector<std::uint32_t>{0, 1, 3});
  CHECK_THROWS(floor_contacts(body_of({Vec3(0, 0, 0.001)})));
}

TEST_CASE("prf1 examples") {
  const Prf1 half = prf1(obj_set(range(1, 8)), obj_set(range(5, 12)));
  CHECK(half.precision == 0.5);
  CHECK(half.recall == 0.5);
  CHECK(half.f1 == 0.5);

  const Prf1 both_empty = prf1(obj_set({}), obj_set({}));
  CHECK(both_empty.precision == 1.0);
  CHECK(both_empty.recall == 1.0);
  CHECK(both_empty.f1 == 1.0);

  const Prf1 no_pred = prf1(obj_set({}), obj_set({1, 2}));
  CHECK(no_pred.recall == 0.0);
  CHECK(no_pred.f1 == 0.0);
  const Prf1 no_truth = prf1(obj_set({1, 2}), obj_set({}));
  CHECK(no_truth.precision == 0.0);
  CHECK(no_truth.f1 == 0.0);

  const Prf1 p = prf1(obj_set({1, 2, 3, 4}), obj_set({3, 4}));
  CHECK(p.precision == 0.5);
  CHECK(p.recall == 1.0);
  CHECK(p.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  CHECK_THROWS_AS(prf1(obj_set({1}), ContactSet::from_ids(ContactTarget::Floor, {1})), ValidationError);
  CHECK(ContactSet::from_ids(ContactTarget::Object, {3, 1, 3, 2}).ids == std::vector<std::uint32_t>{1, 2, 3});
}

TEST_CASE("prf1 properties: symmetry and bounds") {
  std::mt19937_64 g(11);
  for (int t = 0; t < 500; ++t) {
    std::vector<std::uint32_t> a, b;
    for (std::uint32_t i = 0; i < 40; ++i) {
      if (testing::uniform(g, 0, 1) < 0.3) a.push_back(i);
      if (testing::uniform(g, 0, 1) < 0.3) b.push_back(i);
    }
    const Prf1 ab = prf1(obj_set(a), obj_set(b));
    const Prf1 ba = prf1(obj_set(b), obj_set(a));
    CHECK(ab.precision == ba.recall);
    CHECK(ab.recall == ba.precision);
    CHECK(ab.f1 == doctest::Approx(ba.f1).epsilon(1e-15));
    for (double v : {ab.precision, ab.recall, ab.f1}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(prf1(obj_set(a), obj_set(a)).f1 == 1.0);
  }
}

TEST_CASE("contact threshold is monotone") {
  const TriMesh ball = shapes::icosphere(Vec3::Zero(), 0.2, 2);
  std::mt19937_64 g(5);
  std::vector<Vec3> pts;
  for (int i = 0; i < 400; ++i) pts.push_back(testing::random_point(g, -0.35, 0.35));
  const BodyFrame b = body_of(pts);
  std::size_t prev = 0;
  for (double thr : {0.001, 0.01, 0.02, 0.05, 0.1, 0.2}) {
    const ContactSet c = annotate_contacts(b, ball, thr);
    CHECK(c.size() >= prev);
    prev = c.size();
  }
}

TEST_CASE("evaluate_frame: fixture grasp only touches the table-top voxel layer") {
  const TableFixture fx = make_table_scene(2);
  const LabelTable labels = fixture_labels();
  PenConfig pen;
  const VoxelGrid grid = scene_occupancy(fx.scene, labels.at("floor"),
                                         penetration_region(fx.object.bounds().center(), fx.scene.bounds(), pen), pen);
  FrameAssets assets;
  assets.occupancy = &grid;
  assets.object = &fx.object;
  const FrameOutcome out = evaluate_frame("ideal", fx.body, assets);
  REQUIRE(out.ok());
  const MetricsReport& r = *out.report;
  CHECK(r.sample_id == "ideal");
  // Hands resting just above the top share its occupied 5 cm cell; nothing
  // else may count.
  const double top = fx.truth.at("table").at("max")[2].get<double>();
  const double z0 = grid.origin().z(), s = grid.voxel_size();
  const double layer_top = z0 + (std::floor((top - z0) / s) + 1) * s;
  std::size_t inside = 0;
  for (std::size_t i = 0; i < fx.body.size(); ++i) {
    if (!oracle::occupied(grid, fx.body.vertices[i])) continue;
    ++inside;
    CHECK(fx.body.vertices[i].z() >= top);
    CHECK(fx.body.vertices[i].z() < layer_top);
    CHECK(fx.body.parts[i] != BodyPart::Foot);
    CHECK(fx.body.parts[i] != BodyPart::LowerLeg);
    CHECK(fx.body.parts[i] != BodyPart::Pelvis);
  }
  CHECK(r.scene_pen == static_cast<double>(inside) / fx.body.size());
  CHECK(r.scene_pen < 0.10);
  CHECK(r.floor_pen == 0.0);
  CHECK(r.object_pen_negative == 0);
  CHECK(r.object_pen_sdf > 0.0);
  CHECK(r.object_contact.f1 == 1.0);
  CHECK(r.floor_contact.f1 == 1.0);
}

TEST_CASE("evaluate_frame: graded fixtures hit their targets exactly") {
  for (const auto& [scene, floor] : std::vector<std::pair<double, double>>{
           {0.0435, 0.0362}, {0.0313, 0.0}, {0.0362, 0.0124}}) {
    CAPTURE(scene);
    const GradedFixture fx = make_graded_penetration(4, scene, floor);
    const VoxelGrid grid = graded_grid(fx);
    FrameAssets assets;
    assets.occupancy = &grid;
    assets.object = &fx.object;
    const FrameOutcome out = evaluate_frame("graded", fx.body, assets);
    REQUIRE(out.ok());
    CHECK(out.report->scene_pen == doctest::Approx(scene).epsilon(1e-12));
    CHECK(out.report->floor_pen == doctest::Approx(floor).epsilon(1e-12));
    // Independent count through the oracle cell lookup.
    std::size_t inside = 0;
    for (const Vec3& v : fx.body.vertices) inside += oracle::occupied(grid, v);
    CHECK(static_cast<double>(inside) / fx.body.size() == doctest::Approx(scene).epsilon(1e-12));
  }
}

TEST_CASE("evaluate_frame: metrics do not depend on vertex order") {
  const GradedFixture fx = make_graded_penetration(9, 0.0362, 0.01);
  const VoxelGrid grid = graded_grid(fx);
  FrameAssets assets;
  assets.occupancy = &grid;
  assets.object = &fx.object;
  const FrameOutcome a = evaluate_frame("x", fx.body, assets);

  std::vector<std::uint32_t> perm(fx.body.size());
  std::iota(perm.begin(), perm.end(), 0u);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
  BodyFrame shuffled;
  for (auto i : perm) add(shuffled, fx.body.vertices[i], fx.body.parts[i]);
  shuffled.pelvis = fx.body.pelvis;
  const FrameOutcome b = evaluate_frame("x", shuffled, assets);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(a.report->scene_pen == b.report->scene_pen);
  CHECK(a.report->floor_pen == b.report->floor_pen);
  CHECK(a.report->object_pen_sdf == doctest::Approx(b.report->object_pen_sdf).epsilon(1e-12));
  CHECK(a.report->object_contact.f1 == b.report->object_contact.f1);
}

TEST_CASE("evaluate_frame: pure and reports failures instead of throwing") {
  const GradedFixture fx = make_graded_penetration(1, 0.01, 0.0);
  const VoxelGrid grid = graded_grid(fx);
  const std::vector<Vec3> before = fx.body.vertices;
  FrameAssets assets;
  assets.occupancy = &grid;
  assets.object = &fx.object;
  const FrameOutcome first = evaluate_frame("p", fx.body, assets);
  const FrameOutcome second = evaluate_frame("p", fx.body, assets);
  CHECK(fx.body.vertices == before);
  CHECK(first.report->to_json() == second.report->to_json());

  FrameAssets missing;
  const FrameOutcome f1 = evaluate_frame("m", fx.body, missing);
  CHECK_FALSE(f1.ok());
  CHECK_FALSE(f1.failure.empty());

  assets.gt_object = obj_set({static_cast<std::uint32_t>(fx.body.size())});
  CHECK_FALSE(evaluate_frame("oob", fx.body, assets).ok());

  BodyFrame broken = fx.body;
  broken.vertices[3].x() = std::nan("");
  assets.gt_object.reset();
  CHECK_FALSE(evaluate_frame("nan", broken, assets).ok());
}

TEST_CASE("aggregate: means of per-sample values") {
  MetricsReport a, b;
  a.scene_pen = 0.02;
  b.scene_pen = 0.04;
  a.floor_pen = 0.0;
  b.floor_pen = 0.5;
  a.object_contact = {1.0, 0.5, 2.0 / 3.0};
  b.object_contact = {0.0, 0.0, 0.0};
  const AggregateRow row = aggregate({a, b}, "m", 3);
  CHECK(row.method == "m");
  CHECK(row.count == 2);
  CHECK(row.failed == 3);
  CHECK(row.mean.scene_pen == doctest::Approx(0.03));
  CHECK(row.mean.floor_pen == doctest::Approx(0.25));
  CHECK(row.mean.object_contact.precision == doctest::Approx(0.5));
  CHECK(row.mean.object_contact.f1 == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(aggregate({}, "m"), ValidationError);

  std::mt19937_64 g(21);
  std::vector<MetricsReport> rs(100);
  for (auto& r : rs) {
    r.scene_pen = testing::uniform(g, 0, 0.1);
    r.object_pen_sdf = testing::uniform(g, -0.01, 0.05);
    r.floor_contact.f1 = testing::uniform(g, 0, 1);
  }
  const AggregateRow big = aggregate(rs, "rand");
  double s = 0, o = 0, f = 0;
  for (const auto& r : rs) {
    s += r.scene_pen;
    o += r.object_pen_sdf;
    f += r.floor_contact.f1;
  }
  CHECK(big.mean.scene_pen == doctest::Approx(s / 100).epsilon(1e-12));
  CHECK(big.mean.object_pen_sdf == doctest::Approx(o / 100).epsilon(1e-12));
  CHECK(big.mean.floor_contact.f1 == doctest::Approx(f / 100).epsilon(1e-12));
}

TEST_CASE("report rendering and json round trip") {
  MetricsReport r;
  r.sample_id = "s1";
  r.scene_pen = 0.0435;
  r.floor_pen = 0.0362;
  r.object_pen_sdf = 0.0123;
  r.object_contact = {0.9, 0.8, 0.85};
  r.floor_contact = {1, 1, 1};
  const MetricsReport back = MetricsReport::from_json(r.to_json());
  CHECK(back.to_json() == r.to_json());

  const std::vector<AggregateRow> rows = {aggregate({r}, "ours")};
  const std::string csv = render_csv(rows);
  CHECK(csv.find("method,count,failed,scene_pen") == 0);
  CHECK(csv.find("ours,1,0,0.043500,0.012300,0.036200,0.9000,0.8000,0.8500") != std::string::npos);
  const std::string table = render_table(rows);
  const auto head = table.substr(0, table.find('\n'));
  const auto p = head.find("Penetration"), o = head.find("Object Contact"), f = head.find("Floor Contact");
  CHECK(p != std::string::npos);
  CHECK(p < o);
  CHECK(o < f);
  CHECK(table.find("4.35%") != std::string::npos);
  CHECK(table.find("3.62%") != std::string::npos);
}

TEST_CASE("ground-truth contact files") {
  testing::TempDir dir("gt");
  GroundTruthContacts gt;
  gt.object = obj_set({4, 2, 9});
  write_gt_contacts(dir / "gt.json", gt);
  const GroundTruthContacts back = load_gt_contacts(dir / "gt.json");
  REQUIRE(back.object);
  CHECK(back.object->ids == std::vector<std::uint32_t>{2, 4, 9});
  CHECK_FALSE(back.floor);
  testing::write_text(dir / "bad.json", R"({"object": [1, -2]})");
  CHECK_THROWS(load_gt_contacts(dir / "bad.json"));
}
