#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "scenegrasp/errors.hpp"
#include "scenegrasp/penetration.hpp"
#include "scenegrasp/shapes.hpp"
#include "test_util.hpp"

using namespace scenegrasp;

namespace {

TriMesh random_soup(std::mt19937_64& g, int n, double lo, double hi) {
  TriMesh m;
  for (int t = 0; t < n; ++t) {
    const Vec3 c = testing::random_point(g, lo, hi);
    const double size = testing::uniform(g, 0.05, 0.6);
    for (int k = 0; k < 3; ++k) m.vertices.push_back(c + testing::random_point(g, -size, size));
    const auto b = static_cast<std::uint32_t>(3 * t);
    m.faces.push_back({b, b + 1, b + 2});
  }
  return m;
}

}  // namespace

TEST_CASE("voxelize: empty scene gives an empty grid") {
  const VoxelGrid g = voxelize(TriMesh{}, Aabb{Vec3(0, 0, 0), Vec3(1, 1, 1)}, 0.1);
  CHECK(g.dims() == CellIndex{10, 10, 10});
  CHECK(g.occupied_count() == 0);
}

TEST_CASE("voxelize: axis-aligned quad fills exactly one layer") {
  // Quad at z = 0.25 (mid-cell) over the whole region: layer k=2 only.
  const TriMesh quad =
      shapes::height_field(0, 0, 1, 1, 1.0, [](double, double) { return 0.25; });
  const VoxelGrid g = voxelize(quad, Aabb{Vec3(0, 0, 0), Vec3(1, 1, 1)}, 0.1);
  for (int k = 0; k < 10; ++k)
    for (int j = 0; j < 10; ++j)
      for (int i = 0; i < 10; ++i) CHECK(g.occupied(i, j, k) == (k == 2));
}

TEST_CASE("voxelize: random soups vs clipping oracle") {
  std::mt19937_64 g(77);
  for (int trial = 0; trial < 20; ++trial) {
    const TriMesh soup = random_soup(g, 6, -0.2, 1.2);
    const Vec3 lo = testing::random_point(g, -0.1, 0.1);
    const double s = testing::uniform(g, 0.06, 0.15);
    const VoxelGrid grid = voxelize(soup, Aabb{lo, lo + Vec3(1, 1, 1)}, s);
    CHECK(grid.cells() == oracle::voxelize(soup, grid));
  }
}

TEST_CASE("triangle_box_overlap agrees with clipping on random pairs") {
  std::mt19937_64 g(8);
  int hits = 0;
  for (int t = 0; t < 20000; ++t) {
    const Vec3 a = testing::random_point(g, -1, 1), b = testing::random_point(g, -1, 1),
               c = testing::random_point(g, -1, 1);
    const Vec3 center = testing::random_point(g, -0.8, 0.8);
    const Vec3 half = testing::random_point(g, 0.01, 0.3);
    const bool want = oracle::triangle_touches_box(a, b, c, Aabb{center - half, center + half});
    hits += want;
    CHECK(triangle_box_overlap(center, half, a, b, c) == want);
  }
  CHECK(hits > 1000);  // both outcomes well represented
}

TEST_CASE("downward_fill: examples") {
  VoxelGrid g(Vec3::Zero(), 1.0, {4, 3, 5});
  CHECK(downward_fill(g).occupied_count() == 0);
  g.set(2, 1, 3);
  const VoxelGrid f = downward_fill(g);
  CHECK(f.filled());
  CHECK(f.occupied_count() == 4);
  for (int k = 0; k <= 3; ++k) CHECK(f.occupied(2, 1, k));
  CHECK_FALSE(f.occupied(2, 1, 4));
}

TEST_CASE("downward_fill: random grids vs column oracle, idempotent and monotone") {
  std::mt19937_64 g(4);
  for (int trial = 0; trial < 50; ++trial) {
    const CellIndex d{1 + static_cast<int>(g() % 16), 1 + static_cast<int>(g() % 16),
                      1 + static_cast<int>(g() % 16)};
    VoxelGrid grid(Vec3::Zero(), 0.1, d);
    const double density = testing::uniform(g, 0.0, 0.2);
    for (auto& c : grid.cells()) c = testing::uniform(g, 0, 1) < density;
    const VoxelGrid f = downward_fill(grid);
    CHECK(f.cells() == oracle::column_fill(grid));
    CHECK(downward_fill(f).same_occupancy(f));
    CHECK(f.occupied_count() >= grid.occupied_count());
    for (std::size_t i = 0; i < grid.cell_count(); ++i)
      if (grid.cells()[i]) CHECK(f.cells()[i]);
  }
}

TEST_CASE("grid geometry: point to cell mapping uses floor") {
  const VoxelGrid g(Vec3(-1, -1, 0), 0.5, {4, 4, 2});
  CHECK(g.cell_of(Vec3(-1, -1, 0)) == CellIndex{0, 0, 0});
  CHECK(g.cell_of(Vec3(-0.5, 0.49, 0.99)) == CellIndex{1, 2, 1});
  CHECK_FALSE(g.cell_of(Vec3(1.0, 0, 0)).has_value());  // upper face is open
  CHECK_FALSE(g.cell_of(Vec3(0, 0, -1e-12)).has_value());
  CHECK_FALSE(g.occupied_at(Vec3(10, 10, 10)));
}

TEST_CASE("grid budget and region errors") {
  CHECK_THROWS_AS(VoxelGrid::covering(Aabb{Vec3::Zero(), Vec3(10, 10, 10)}, 0.01, 1000), ConfigError);
  CHECK_THROWS_AS(voxelize(TriMesh{}, Aabb{Vec3::Zero(), Vec3(1, 1, 1)}, 0.0), ConfigError);
  PenConfig cfg;
  CHECK_THROWS_AS(penetration_region(Vec3(100, 100, 100), Aabb{Vec3::Zero(), Vec3(1, 1, 1)}, cfg),
                  ConfigError);
  const Aabb r = penetration_region(Vec3(0.5, 0.5, 0.5), Aabb{Vec3::Zero(), Vec3(1, 1, 1)}, cfg);
  CHECK(r.min == Vec3(0, 0, 0));
  CHECK(r.max == Vec3(1, 1, 1));
  cfg.clip_to_scene = false;
  CHECK(penetration_region(Vec3::Zero(), Aabb{}, cfg).max == Vec3(2, 2, 2));
}

TEST_CASE("binary grid round trip and JSON dump") {
  std::mt19937_64 g(12);
  VoxelGrid grid(Vec3(0.1, -0.2, 0.3), 0.05, {7, 5, 3});
  for (auto& c : grid.cells()) c = g() % 3 == 0;
  grid = downward_fill(grid);
  testing::TempDir dir("grid");
  write_grid(dir / "g.bin", grid);
  const VoxelGrid r = read_grid(dir / "g.bin");
  CHECK(r.same_occupancy(grid));
  CHECK(r.filled());
  CHECK(r.origin() == grid.origin());
  // Header is 8 + 24 + 8 + 12 + 1 bytes, then ceil(105 / 8) bytes of bits.
  CHECK(encode_grid(grid).size() == 53 + 14);
  const auto j = grid_to_json(grid);
  CHECK(j.at("occupied").size() == grid.occupied_count());
  CHECK_THROWS_AS(grid_to_json(VoxelGrid(Vec3::Zero(), 1.0, {33, 32, 32})), ConfigError);
  std::string bad = encode_grid(grid);
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_grid(bad), FormatError);
  CHECK_THROWS_AS(decode_grid(encode_grid(grid).substr(0, 60)), FormatError);
}
