#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "scenegrasp/body.hpp"
#include "scenegrasp/mesh.hpp"

namespace scenegrasp {

enum class FixtureKind { FlatRoom, WarpedFloor, TableScene, BoxedObject, GradedPenetration };

/// "flat-room", "warped-floor", "table-scene", "boxed-object",
/// "graded-penetration". Throws ConfigError otherwise.
FixtureKind fixture_kind_from_string(const std::string& name);
std::string to_string(FixtureKind kind);

struct FixtureOptions {
  FixtureKind kind = FixtureKind::FlatRoom;
  std::uint64_t seed = 0;
  /// graded-penetration targets: body-in-scene ratio and feet-below-floor
  /// ratio. Must be multiples of 1/10000 and 1/5000 respectively.
  double scene_ratio = 0.0313;
  double floor_ratio = 0.0;
  /// table-scene: number of samples written under sample_NNN/.
  int count = 1;
};

/// The standard label table used by every fixture.
LabelTable fixture_labels();

/// Writes the fixture files into `out_dir` (created if missing) plus a
/// truth.json sidecar, and returns the sidecar. table-scene also writes a
/// dataset.json manifest that `run` accepts.
nlohmann::json gen_fixtures(const FixtureOptions& opts, const std::filesystem::path& out_dir);

/// In-memory builders (the same geometry gen_fixtures writes).
struct RoomFixture {
  TriMesh scene;
  nlohmann::json truth;
};
RoomFixture make_room(std::uint64_t seed, bool warped);

struct TableFixture {
  TriMesh scene;
  TriMesh object;
  std::vector<Vec3> trajectory;
  BodyFrame body;
  nlohmann::json truth;
};
TableFixture make_table_scene(std::uint64_t seed);
TableFixture make_boxed_object(std::uint64_t seed);

struct GradedFixture {
  TriMesh scene;
  TriMesh object;
  BodyFrame body;
  nlohmann::json truth;
};
GradedFixture make_graded_penetration(std::uint64_t seed, double scene_ratio, double floor_ratio);

}  // namespace scenegrasp
