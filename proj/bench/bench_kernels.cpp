// Serial reference vs OpenMP kernels. The second argument of the parallel
// runs is the thread count.

#include <cmath>
#include <random>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "scenegrasp/kernels.hpp"
#include "scenegrasp/shapes.hpp"

using namespace scenegrasp;

namespace {

TriMesh scene() {
  static const TriMesh m = merge({
      shapes::height_field(0, 0, 6, 6, 0.05, [](double x, double y) { return 0.02 * std::sin(x) * std::cos(y); }),
      shapes::block(2, 2, 3.5, 3, 0, 0.75, 0.05), shapes::icosphere(Vec3(4.5, 4.5, 1), 0.6, 4)});
  return m;
}

VoxelGrid empty_grid() { return VoxelGrid(Vec3(-0.1, -0.1, -0.1), 0.05, {124, 124, 40}); }

std::vector<Vec3> points(std::size_t n) {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(0, 6), h(0, 2);
  std::vector<Vec3> out(n);
  for (auto& p : out) p = Vec3(u(g), u(g), h(g));
  return out;
}

template <bool Parallel>
void BM_Rasterize(benchmark::State& state) {
  if (Parallel) omp_set_num_threads(static_cast<int>(state.range(0)));
  const TriMesh m = scene();
  for (auto _ : state) {
    VoxelGrid g = empty_grid();
    if (Parallel) kernels::parallel::rasterize_triangles(m, g);
    else kernels::serial::rasterize_triangles(m, g);
    benchmark::DoNotOptimize(g.cells().data());
  }
}

template <bool Parallel>
void BM_FillBelow(benchmark::State& state) {
  if (Parallel) omp_set_num_threads(static_cast<int>(state.range(0)));
  VoxelGrid base = empty_grid();
  kernels::serial::rasterize_triangles(scene(), base);
  for (auto _ : state) {
    VoxelGrid g = base;
    if (Parallel) kernels::parallel::fill_below(g);
    else kernels::serial::fill_below(g);
    benchmark::DoNotOptimize(g.cells().data());
  }
}

template <bool Parallel>
void BM_CountOccupied(benchmark::State& state) {
  if (Parallel) omp_set_num_threads(static_cast<int>(state.range(0)));
  VoxelGrid g = empty_grid();
  kernels::serial::rasterize_triangles(scene(), g);
  kernels::serial::fill_below(g);
  const auto pts = points(200000);
  for (auto _ : state)
    benchmark::DoNotOptimize(Parallel ? kernels::parallel::count_in_occupied(pts, g)
                                      : kernels::serial::count_in_occupied(pts, g));
}

template <bool Parallel>
void BM_SignedDistance(benchmark::State& state) {
  if (Parallel) omp_set_num_threads(static_cast<int>(state.range(0)));
  const MeshDistance obj(shapes::icosphere(Vec3(3, 3, 1), 0.4, 4));
  const auto pts = points(5000);
  for (auto _ : state) {
    auto d = Parallel ? kernels::parallel::signed_distances(obj, pts) : kernels::serial::signed_distances(obj, pts);
    benchmark::DoNotOptimize(d.data());
  }
}

void threads(benchmark::internal::Benchmark* b) {
  for (int t : {1, 2, 4}) b->Arg(t);
}

}  // namespace

BENCHMARK(BM_Rasterize<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Rasterize<true>)->Apply(threads)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FillBelow<false>)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FillBelow<true>)->Apply(threads)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CountOccupied<false>)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CountOccupied<true>)->Apply(threads)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SignedDistance<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SignedDistance<true>)->Apply(threads)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
