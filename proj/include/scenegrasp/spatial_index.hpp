#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "scenegrasp/geometry.hpp"

namespace scenegrasp {

struct Neighbor {
  std::uint32_t index = 0;
  double distance = 0.0;
};

/// KD-tree over a fixed point set. Nearest-neighbour ties resolve to the
/// lowest index, so results agree exactly with a first-minimum linear scan.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  explicit SpatialIndex(std::vector<Vec3> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<Vec3>& points() const { return points_; }

  /// Throws Error on an empty index.
  Neighbor nearest(const Vec3& query) const;
  /// Indices with distance <= radius, ascending by index.
  std::vector<std::uint32_t> within_radius(const Vec3& query, double radius) const;

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;  // range into order_
    std::int32_t left = -1, right = -1;
    int axis = -1;                     // -1 for leaves
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace scenegrasp
