#include <doctest.h>

#include <cstdlib>
#include <map>

#include <sys/wait.h>
#include <fstream>
#include <sstream>

#include "scenegrasp/errors.hpp"
#include "scenegrasp/fixtures.hpp"
#include "scenegrasp/pipeline.hpp"
#include "test_util.hpp"

using namespace scenegrasp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Every regular file under `root`, relative path -> bytes.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  return out;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(SCENEGRASP_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config: json round trip, unknown keys rejected") {
  PipelineConfig cfg;
  cfg.seed = 17;
  cfg.jobs = 3;
  cfg.augment.sample_count = 1234;
  const PipelineConfig back = PipelineConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK_FALSE(cfg.snapshot().contains("jobs"));
  nlohmann::json bad = cfg.to_json();
  bad["mystery"] = 1;
  CHECK_THROWS_AS(PipelineConfig::from_json(bad), ConfigError);
  nlohmann::json bad_jobs = cfg.to_json();
  bad_jobs["jobs"] = 0;
  CHECK_THROWS_AS(PipelineConfig::from_json(bad_jobs), ConfigError);
}

TEST_CASE("manifest: duplicate ids rejected, relative paths resolved") {
  testing::TempDir dir("manifest");
  testing::write_text(dir / "m.json", R"({"samples": [
    {"id": "a", "scene": "s.ply", "labels": "l.json", "object": "o.obj",
     "trajectory": "t.json", "body_frames": ["b.obj"], "part_map": "p.json"},
    {"id": "a", "scene": "s.ply", "labels": "l.json", "object": "o.obj",
     "trajectory": "t.json", "body_frames": ["b.obj"], "part_map": "p.json"}]})");
  CHECK_THROWS_AS(DatasetManifest::load(dir / "m.json"), ConfigError);
  testing::write_text(dir / "one.json", R"([{"id": "a", "scene": "s.ply", "labels": "l.json",
    "object": "o.obj", "trajectory": "t.json", "body_frame": "b.obj", "part_map": "p.json"}])");
  const DatasetManifest m = DatasetManifest::load(dir / "one.json");
  REQUIRE(m.samples.size() == 1);
  CHECK(m.samples[0].scene == dir / "s.ply");
  CHECK(m.samples[0].body_frames.size() == 1);
  CHECK(m.samples[0].receptacle_label == "table");
}

TEST_CASE("pose json round trip") {
  const RigidTransform t = RigidTransform::from_yaw(0.7, Vec3(1, -2, 0.3));
  const RigidTransform back = pose_from_json(pose_to_json(t));
  CHECK((back.rotation() - t.rotation()).norm() < 1e-15);
  CHECK(back.translation() == t.translation());
}

TEST_CASE("run: commits every sample, reruns are no-ops, output independent of jobs") {
  testing::TempDir dir("run");
  FixtureOptions opts;
  opts.kind = FixtureKind::TableScene;
  opts.seed = 3;
  opts.count = 3;
  gen_fixtures(opts, dir / "data");
  const DatasetManifest ds = DatasetManifest::load(dir / "data" / "dataset.json");
  REQUIRE(ds.samples.size() == 3);

  PipelineConfig cfg;
  const RunSummary first = run_pipeline(ds, cfg, dir / "out1");
  CHECK(first.processed == 3);
  CHECK(first.failed == 0);
  CHECK(first.exit_code() == 0);
  for (const auto& s : ds.samples) {
    CHECK(fs::exists(dir / "out1" / "samples" / (s.id + ".json")));
    CHECK(fs::exists(dir / "out1" / s.id / "scene_refined.ply"));
    CHECK(fs::exists(dir / "out1" / s.id / "object_placed.obj"));
    CHECK(fs::exists(dir / "out1" / s.id / "trajectory_aligned.json"));
  }
  const std::string csv = slurp(dir / "out1" / "aggregate.csv");
  CHECK(csv.find("pipeline,3,0,") != std::string::npos);
  std::istringstream lines(slurp(dir / "out1" / "reports.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("config"));
    CHECK(j.at("report").at("scene_pen").get<double>() < 0.10);
    ++n;
  }
  CHECK(n == 3);

  const auto before = tree(dir / "out1");
  const RunSummary again = run_pipeline(ds, cfg, dir / "out1");
  CHECK(again.processed == 0);
  CHECK(again.skipped == 3);
  CHECK(tree(dir / "out1") == before);

  cfg.jobs = 2;
  run_pipeline(ds, cfg, dir / "out2");
  CHECK(tree(dir / "out2") == before);
}

TEST_CASE("run: a missing input fails only its own sample") {
  testing::TempDir dir("isolate");
  FixtureOptions opts;
  opts.kind = FixtureKind::TableScene;
  opts.count = 2;
  gen_fixtures(opts, dir / "data");
  DatasetManifest ds = DatasetManifest::load(dir / "data" / "dataset.json");
  fs::remove(ds.samples[1].object);
  const RunSummary r = run_pipeline(ds, {}, dir / "out");
  CHECK(r.processed == 1);
  CHECK(r.failed == 1);
  CHECK(r.exit_code() == 1);
  CHECK(r.failed_ids == std::vector<std::string>{ds.samples[1].id});
  CHECK(fs::exists(dir / "out" / "samples" / (ds.samples[0].id + ".json")));
  CHECK(fs::exists(dir / "out" / "failures" / (ds.samples[1].id + ".json")));
  CHECK(slurp(dir / "out" / "aggregate.csv").find("pipeline,1,1,") != std::string::npos);
}

TEST_CASE("fixtures: same seed gives identical files, graded sidecar is consistent") {
  testing::TempDir dir("fixtures");
  FixtureOptions warped;
  warped.kind = FixtureKind::WarpedFloor;
  warped.seed = 7;
  gen_fixtures(warped, dir / "a");
  gen_fixtures(warped, dir / "b");
  CHECK(tree(dir / "a") == tree(dir / "b"));

  FixtureOptions graded;
  graded.kind = FixtureKind::GradedPenetration;
  graded.scene_ratio = 0.0435;
  graded.floor_ratio = 0.0362;
  const nlohmann::json truth = gen_fixtures(graded, dir / "g");
  CHECK(truth.at("scene_pen").get<double>() == doctest::Approx(0.0435).epsilon(1e-12));
  CHECK(truth.at("floor_pen").get<double>() == doctest::Approx(0.0362).epsilon(1e-12));
  CHECK(fs::exists(dir / "g" / "eval.json"));

  graded.scene_ratio = 0.00005;
  CHECK_THROWS_AS(gen_fixtures(graded, dir / "h"), ConfigError);
  CHECK_THROWS_AS(fixture_kind_from_string("volcano"), ConfigError);
}

TEST_CASE("eval: graded fixture through the dataset evaluator") {
  testing::TempDir dir("eval");
  FixtureOptions graded;
  graded.kind = FixtureKind::GradedPenetration;
  graded.scene_ratio = 0.0313;
  gen_fixtures(graded, dir / "g");
  const DatasetManifest ds = DatasetManifest::load(dir / "g" / "eval.json");
  const EvalSummary s = evaluate_dataset(ds, {}, dir / "out", "graded");
  CHECK(s.exit_code() == 0);
  REQUIRE(s.reports.size() == 1);
  CHECK(s.reports[0].scene_pen == doctest::Approx(0.0313).epsilon(1e-12));
  CHECK(slurp(dir / "out" / "aggregate.txt").find("3.13%") != std::string::npos);
}

TEST_CASE("cli: exit codes") {
  testing::TempDir dir("cli");
  CHECK(cli("--help") == 0);
  CHECK(cli("no-such-command") == 2);
  CHECK(cli("gen-fixtures --kind volcano --out " + (dir / "x").string()) == 2);
  CHECK(cli("gen-fixtures --kind flat-room --seed 2 --out " + (dir / "room").string()) == 0);
  CHECK(fs::exists(dir / "room" / "scene.ply"));
  CHECK(cli("refine-floor --scene " + (dir / "room" / "scene.ply").string() + " --labels " +
            (dir / "room" / "labels.json").string() + " --out " + (dir / "r.ply").string()) == 0);
  CHECK(cli("refine-floor --scene " + (dir / "missing.ply").string() + " --labels " +
            (dir / "room" / "labels.json").string() + " --out " + (dir / "r2.ply").string()) != 0);
  testing::write_text(dir / "cfg.json", R"({"bogus": true})");
  CHECK(cli("--config " + (dir / "cfg.json").string() + " gen-fixtures --kind flat-room --out " +
            (dir / "y").string()) == 2);
}
