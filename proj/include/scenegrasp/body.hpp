#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scenegrasp/mesh.hpp"

namespace scenegrasp {

enum class BodyPart : std::uint8_t { Other = 0, HandRight, HandLeft, Foot, LowerLeg, Pelvis };

const char* part_name(BodyPart p);
BodyPart part_from_name(const std::string& name);

/// One time step of a body: vertices, a part per vertex, and the pelvis.
struct BodyFrame {
  std::vector<Vec3> vertices;
  std::vector<BodyPart> parts;  ///< same length as vertices
  Vec3 pelvis = Vec3::Zero();

  std::size_t size() const { return vertices.size(); }
  /// Vertex ids whose part is any of `wanted`, ascending.
  std::vector<std::uint32_t> ids_of(std::initializer_list<BodyPart> wanted) const;
  std::vector<std::uint32_t> hand_ids() const {
    return ids_of({BodyPart::HandRight, BodyPart::HandLeft});
  }
  std::vector<std::uint32_t> foot_ids() const { return ids_of({BodyPart::Foot}); }

  void validate() const;
};

/// Part-map JSON:
///   {"num_vertices": N, "parts": {"hand_R": [ids], "foot": [ids], ...},
///    "pelvis": [x, y, z]}            // optional
/// Vertices not listed are `other`. Without "pelvis", the frame's pelvis is
/// the centroid of its pelvis-part vertices (or of all vertices).
struct PartMap {
  std::vector<BodyPart> parts;
  bool has_pelvis = false;
  Vec3 pelvis = Vec3::Zero();
};

PartMap load_part_map(const std::filesystem::path& path);
void write_part_map(const std::filesystem::path& path, const PartMap& map);

BodyFrame make_body_frame(std::vector<Vec3> vertices, const PartMap& map);
BodyFrame load_body_frame(const std::filesystem::path& mesh_path,
                          const std::filesystem::path& part_map_path);

}  // namespace scenegrasp
