#include "scenegrasp/mesh.hpp"

#include <unordered_map>

#include "scenegrasp/errors.hpp"

namespace scenegrasp {

Vec3 TriMesh::face_normal(std::size_t f) const {
  const Face& t = faces[f];
  const Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
  const double len = n.norm();
  return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

double TriMesh::face_area(std::size_t f) const {
  const Face& t = faces[f];
  return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
}

void TriMesh::validate() const {
  const auto n = vertices.size();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    for (auto idx : t) {
      if (idx >= n)
        throw ValidationError("face " + std::to_string(f) + " references vertex " +
                              std::to_string(idx) + " but mesh has " + std::to_string(n) +
                              " vertices");
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw ValidationError("face " + std::to_string(f) + " is degenerate (repeated vertex index)");
  }
  if (has_labels() && face_labels.size() != faces.size())
    throw ValidationError("face label count " + std::to_string(face_labels.size()) +
                          " != face count " + std::to_string(faces.size()));
}

bool TriMesh::is_watertight() const {
  if (faces.empty()) return false;
  std::unordered_map<std::uint64_t, int> edge_use;
  edge_use.reserve(faces.size() * 3);
  for (const Face& t : faces) {
    for (int e = 0; e < 3; ++e) {
      std::uint64_t a = t[e], b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_use[(a << 32) | b];
    }
  }
  for (const auto& [edge, count] : edge_use)
    if (count != 2) return false;
  return true;
}

namespace {

TriMesh filter_faces(const TriMesh& mesh, auto keep) {
  TriMesh out;
  std::vector<std::int64_t> remap(mesh.vertices.size(), -1);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (!keep(f)) continue;
    Face nf{};
    for (int c = 0; c < 3; ++c) {
      const auto v = mesh.faces[f][c];
      if (remap[v] < 0) {
        remap[v] = static_cast<std::int64_t>(out.vertices.size());
        out.vertices.push_back(mesh.vertices[v]);
      }
      nf[c] = static_cast<std::uint32_t>(remap[v]);
    }
    out.faces.push_back(nf);
    if (mesh.has_labels()) out.face_labels.push_back(mesh.face_labels[f]);
  }
  return out;
}

}  // namespace

TriMesh TriMesh::select_label(int label) const {
  if (!has_labels()) return {};
  return filter_faces(*this, [&](std::size_t f) { return face_labels[f] == label; });
}

TriMesh TriMesh::drop_label(int label) const {
  if (!has_labels()) return *this;
  return filter_faces(*this, [&](std::size_t f) { return face_labels[f] != label; });
}

std::optional<int> find_label(const LabelTable& table, const std::string& name) {
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

int require_label(const LabelTable& table, const std::string& name) {
  auto id = find_label(table, name);
  if (!id) throw ValidationError("label table has no entry for '" + name + "'");
  return *id;
}

TriMesh apply_transform(const TriMesh& mesh, const RigidTransform& t) {
  TriMesh out = mesh;
  for (Vec3& v : out.vertices) v = t.apply(v);
  return out;
}

TriMesh merge(const std::vector<TriMesh>& parts) {
  TriMesh out;
  bool any_labels = false;
  for (const auto& p : parts) any_labels = any_labels || p.has_labels();
  for (const auto& p : parts) {
    const auto base = static_cast<std::uint32_t>(out.vertices.size());
    out.vertices.insert(out.vertices.end(), p.vertices.begin(), p.vertices.end());
    for (std::size_t f = 0; f < p.faces.size(); ++f) {
      const Face& t = p.faces[f];
      out.faces.push_back({t[0] + base, t[1] + base, t[2] + base});
      if (any_labels) out.face_labels.push_back(p.has_labels() ? p.face_labels[f] : kUnlabeled);
    }
  }
  return out;
}

}  // namespace scenegrasp
