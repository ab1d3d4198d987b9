#include <json.hpp>

#include "scenegrasp/body.hpp"
#include "scenegrasp/errors.hpp"
#include "scenegrasp/io_util.hpp"
#include "scenegrasp/mesh_io.hpp"

namespace scenegrasp {

namespace {
constexpr std::pair<BodyPart, const char*> kPartNames[] = {
    {BodyPart::Other, "other"},       {BodyPart::HandRight, "hand_R"},
    {BodyPart::HandLeft, "hand_L"},   {BodyPart::Foot, "foot"},
    {BodyPart::LowerLeg, "lower_leg"}, {BodyPart::Pelvis, "pelvis"},
};
}

const char* part_name(BodyPart p) {
  for (const auto& [part, name] : kPartNames)
    if (part == p) return name;
  return "other";
}

BodyPart part_from_name(const std::string& name) {
  for (const auto& [part, n] : kPartNames)
    if (name == n) return part;
  throw ValidationError("unknown body part '" + name + "'");
}

std::vector<std::uint32_t> BodyFrame::ids_of(std::initializer_list<BodyPart> wanted) const {
  std::vector<std::uint32_t> out;
  for (std::size_t v = 0; v < parts.size(); ++v)
    for (BodyPart w : wanted)
      if (parts[v] == w) {
        out.push_back(static_cast<std::uint32_t>(v));
        break;
      }
  return out;
}

void BodyFrame::validate() const {
  if (parts.size() != vertices.size())
    throw ValidationError("part map covers " + std::to_string(parts.size()) +
                          " vertices but the body has " + std::to_string(vertices.size()));
  for (const Vec3& v : vertices)
    if (!v.allFinite()) throw ValidationError("body frame has a non-finite vertex");
}

PartMap load_part_map(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("part map: ") + e.what(), e.byte);
  }
  PartMap map;
  const auto n = j.at("num_vertices").get<std::size_t>();
  map.parts.assign(n, BodyPart::Other);
  for (auto it = j.at("parts").begin(); it != j.at("parts").end(); ++it) {
    const BodyPart part = part_from_name(it.key());
    for (const auto& id : it.value()) {
      const auto v = id.get<std::size_t>();
      if (v >= n) throw ValidationError("part map vertex id " + std::to_string(v) + " out of range");
      map.parts[v] = part;
    }
  }
  if (j.contains("pelvis")) {
    const auto& p = j.at("pelvis");
    map.pelvis = Vec3(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
    map.has_pelvis = true;
  }
  return map;
}

void write_part_map(const std::filesystem::path& path, const PartMap& map) {
  nlohmann::json parts = nlohmann::json::object();
  for (std::size_t v = 0; v < map.parts.size(); ++v)
    if (map.parts[v] != BodyPart::Other) parts[part_name(map.parts[v])].push_back(v);
  nlohmann::json j = {{"num_vertices", map.parts.size()}, {"parts", parts}};
  if (map.has_pelvis) j["pelvis"] = {map.pelvis.x(), map.pelvis.y(), map.pelvis.z()};
  write_atomically(path, j.dump() + "\n");
}

BodyFrame make_body_frame(std::vector<Vec3> vertices, const PartMap& map) {
  BodyFrame body;
  body.vertices = std::move(vertices);
  body.parts = map.parts;
  body.validate();
  if (map.has_pelvis) {
    body.pelvis = map.pelvis;
  } else {
    auto ids = body.ids_of({BodyPart::Pelvis});
    Vec3 sum = Vec3::Zero();
    if (ids.empty()) {
      for (const Vec3& v : body.vertices) sum += v;
      if (!body.vertices.empty()) body.pelvis = sum / static_cast<double>(body.vertices.size());
    } else {
      for (auto id : ids) sum += body.vertices[id];
      body.pelvis = sum / static_cast<double>(ids.size());
    }
  }
  return body;
}

BodyFrame load_body_frame(const std::filesystem::path& mesh_path,
                          const std::filesystem::path& part_map_path) {
  TriMesh mesh = load_mesh(mesh_path);
  return make_body_frame(std::move(mesh.vertices), load_part_map(part_map_path));
}

}  // namespace scenegrasp
