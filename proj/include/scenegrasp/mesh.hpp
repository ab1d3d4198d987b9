#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scenegrasp/geometry.hpp"

namespace scenegrasp {

using Face = std::array<std::uint32_t, 3>;

/// Sentinel for faces whose group has no entry in the label table.
inline constexpr int kUnlabeled = -1;

/// Triangle surface with optional per-face semantic ids. Every scene,
/// object, receptacle and body frame in the toolkit is one of these.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  /// Empty when the mesh carries no labels; otherwise one id per face.
  std::vector<int> face_labels;

  bool has_labels() const { return !face_labels.empty(); }
  Aabb bounds() const { return Aabb::of(vertices); }

  /// Unit normal of face `f` (zero for a zero-area face).
  Vec3 face_normal(std::size_t f) const;
  double face_area(std::size_t f) const;

  /// Throws ValidationError naming the first offending face.
  void validate() const;

  /// True when every undirected edge is shared by exactly two faces.
  bool is_watertight() const;

  /// Faces whose label equals `label`, with the vertex array compacted.
  TriMesh select_label(int label) const;
  /// All faces except those labelled `label`.
  TriMesh drop_label(int label) const;
};

/// Semantic group-name -> integer id, loaded from a JSON sidecar.
using LabelTable = std::map<std::string, int>;

std::optional<int> find_label(const LabelTable& table, const std::string& name);
int require_label(const LabelTable& table, const std::string& name);

/// v' = R v + t for every vertex; faces and labels are copied unchanged.
TriMesh apply_transform(const TriMesh& mesh, const RigidTransform& t);

/// Concatenate meshes, re-indexing faces. Labels are kept when every part
/// carries them, otherwise parts without labels contribute kUnlabeled.
TriMesh merge(const std::vector<TriMesh>& parts);

}  // namespace scenegrasp
