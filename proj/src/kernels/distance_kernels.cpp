#include "scenegrasp/errors.hpp"
#include "scenegrasp/kernels.hpp"

namespace scenegrasp::kernels {

namespace {
// Exceptions cannot leave an OpenMP region, so reject bad input up front.
void check_queries(const MeshDistance& mesh, std::span<const Vec3> points) {
  if (mesh.triangle_count() == 0 && !points.empty())
    throw Error("distance query against a mesh without faces");
  for (const Vec3& p : points)
    if (!p.allFinite()) throw Error("distance query with non-finite point");
}
}  // namespace

namespace serial {

std::vector<double> signed_distances(const MeshDistance& mesh, std::span<const Vec3> points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const Vec3& p : points) out.push_back(mesh.signed_distance(p).value);
  return out;
}

std::vector<double> unsigned_distances(const MeshDistance& mesh, std::span<const Vec3> points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const Vec3& p : points) out.push_back(mesh.unsigned_distance(p));
  return out;
}

}  // namespace serial

namespace parallel {

std::vector<double> signed_distances(const MeshDistance& mesh, std::span<const Vec3> points) {
  check_queries(mesh, points);
  std::vector<double> out(points.size());
  const auto n = static_cast<long long>(points.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (long long v = 0; v < n; ++v) out[v] = mesh.signed_distance(points[v]).value;
  return out;
}

std::vector<double> unsigned_distances(const MeshDistance& mesh, std::span<const Vec3> points) {
  check_queries(mesh, points);
  std::vector<double> out(points.size());
  const auto n = static_cast<long long>(points.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (long long v = 0; v < n; ++v) out[v] = mesh.unsigned_distance(points[v]);
  return out;
}

}  // namespace parallel

}  // namespace scenegrasp::kernels
