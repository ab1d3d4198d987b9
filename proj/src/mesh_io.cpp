#include "scenegrasp/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "scenegrasp/errors.hpp"
#include "scenegrasp/io_util.hpp"

namespace scenegrasp {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "binary PLY I/O assumes a little-endian host");

MeshFormat format_from_path(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".obj") return MeshFormat::Obj;
  if (ext == ".ply") return MeshFormat::Ply;
  throw ConfigError("unsupported mesh extension '" + ext + "' for " + path.string());
}

namespace {

double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw FormatError("expected a number, got '" + std::string(tok) + "'", line);
  return v;
}

long long parse_int(std::string_view tok, std::size_t line) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw FormatError("expected an integer, got '" + std::string(tok) + "'", line);
  return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

int resolve_group(const std::string& name, const LabelTable* labels) {
  if (labels) {
    if (auto id = find_label(*labels, name)) return *id;
  }
  constexpr std::string_view prefix = "label_";
  if (name.rfind(prefix, 0) == 0) {
    int v = 0;
    const char* b = name.data() + prefix.size();
    const char* e = name.data() + name.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec == std::errc() && ptr == e) return v;
  }
  return kUnlabeled;
}

void push_polygon(TriMesh& mesh, const std::vector<std::uint32_t>& poly, int label, bool labelled,
                  std::size_t line) {
  if (poly.size() < 3) throw FormatError("face with fewer than 3 vertices", line);
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
    if (labelled) mesh.face_labels.push_back(label);
  }
}

TriMesh parse_obj(const std::string& text, const LabelTable* labels) {
  TriMesh mesh;
  std::vector<int> labels_seen;
  int current = kUnlabeled;
  bool any_group = false;
  std::vector<std::uint32_t> poly;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    const auto& kw = tok[0];
    if (kw == "v") {
      if (tok.size() < 4) throw FormatError("vertex needs 3 coordinates", line_no);
      mesh.vertices.emplace_back(parse_double(tok[1], line_no), parse_double(tok[2], line_no),
                                 parse_double(tok[3], line_no));
    } else if (kw == "f") {
      poly.clear();
      for (std::size_t k = 1; k < tok.size(); ++k) {
        auto idx_tok = tok[k].substr(0, tok[k].find('/'));
        long long idx = parse_int(idx_tok, line_no);
        if (idx == 0) throw FormatError("OBJ indices are 1-based", line_no);
        if (idx < 0) idx += static_cast<long long>(mesh.vertices.size());
        else idx -= 1;
        if (idx < 0) throw FormatError("negative index before first vertex", line_no);
        poly.push_back(static_cast<std::uint32_t>(idx));
      }
      push_polygon(mesh, poly, current, false, line_no);
      labels_seen.resize(mesh.faces.size(), current);
    } else if (kw == "g" || kw == "o" || kw == "usemtl") {
      std::string name = tok.size() > 1 ? std::string(tok[1]) : std::string();
      current = resolve_group(name, labels);
      any_group = true;
    }
  }
  if (any_group) mesh.face_labels = std::move(labels_seen);
  return mesh;
}

// ---- PLY -------------------------------------------------------------------

enum class PlyType { I8, U8, I16, U16, I32, U32, F32, F64 };

PlyType ply_type(std::string_view name, std::size_t line) {
  if (name == "char" || name == "int8") return PlyType::I8;
  if (name == "uchar" || name == "uint8") return PlyType::U8;
  if (name == "short" || name == "int16") return PlyType::I16;
  if (name == "ushort" || name == "uint16") return PlyType::U16;
  if (name == "int" || name == "int32") return PlyType::I32;
  if (name == "uint" || name == "uint32") return PlyType::U32;
  if (name == "float" || name == "float32") return PlyType::F32;
  if (name == "double" || name == "float64") return PlyType::F64;
  throw FormatError("unknown PLY property type '" + std::string(name) + "'", line);
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::F32;
  bool is_list = false;
  PlyType count_type = PlyType::U8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

class PlyValueReader {
 public:
  PlyValueReader(const std::string& data, std::size_t offset, bool binary, std::size_t first_line)
      : data_(data), pos_(offset), binary_(binary), line_(first_line) {}

  double read(PlyType t) { return binary_ ? read_binary(t) : read_ascii(); }

  std::size_t location() const { return binary_ ? pos_ : line_; }

 private:
  template <typename T>
  double take() {
    if (pos_ + sizeof(T) > data_.size()) throw FormatError("truncated binary PLY body", pos_);
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return static_cast<double>(v);
  }

  double read_binary(PlyType t) {
    switch (t) {
      case PlyType::I8: return take<std::int8_t>();
      case PlyType::U8: return take<std::uint8_t>();
      case PlyType::I16: return take<std::int16_t>();
      case PlyType::U16: return take<std::uint16_t>();
      case PlyType::I32: return take<std::int32_t>();
      case PlyType::U32: return take<std::uint32_t>();
      case PlyType::F32: return take<float>();
      case PlyType::F64: return take<double>();
    }
    return 0.0;
  }

  double read_ascii() {
    while (pos_ < data_.size() && std::isspace(static_cast<unsigned char>(data_[pos_]))) {
      if (data_[pos_] == '\n') ++line_;
      ++pos_;
    }
    std::size_t end = pos_;
    while (end < data_.size() && !std::isspace(static_cast<unsigned char>(data_[end]))) ++end;
    if (end == pos_) throw FormatError("unexpected end of ASCII PLY body", line_);
    double v = parse_double(std::string_view(data_.data() + pos_, end - pos_), line_);
    pos_ = end;
    return v;
  }

  const std::string& data_;
  std::size_t pos_;
  bool binary_;
  std::size_t line_;
};

TriMesh parse_ply(const std::string& data) {
  std::size_t pos = 0, line_no = 0;
  auto next_line = [&]() -> std::string_view {
    if (pos >= data.size()) throw FormatError("PLY header not terminated", line_no);
    std::size_t end = data.find('\n', pos);
    if (end == std::string::npos) end = data.size();
    std::string_view l(data.data() + pos, end - pos);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    return l;
  };

  if (next_line() != "ply") throw FormatError("missing 'ply' magic", 1);
  bool binary = false;
  std::vector<PlyElement> elements;
  for (;;) {
    auto tok = split_ws(next_line());
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() < 2) throw FormatError("bad format line", line_no);
      if (tok[1] == "ascii") binary = false;
      else if (tok[1] == "binary_little_endian") binary = true;
      else throw FormatError("unsupported PLY format '" + std::string(tok[1]) + "'", line_no);
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw FormatError("bad element line", line_no);
      elements.push_back({std::string(tok[1]),
                          static_cast<std::size_t>(parse_int(tok[2], line_no)), {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) throw FormatError("property before element", line_no);
      PlyProperty p;
      if (tok.size() == 5 && tok[1] == "list") {
        p.is_list = true;
        p.count_type = ply_type(tok[2], line_no);
        p.type = ply_type(tok[3], line_no);
        p.name = tok[4];
      } else if (tok.size() == 3) {
        p.type = ply_type(tok[1], line_no);
        p.name = tok[2];
      } else {
        throw FormatError("bad property line", line_no);
      }
      elements.back().props.push_back(p);
    } else {
      throw FormatError("unknown header keyword '" + std::string(tok[0]) + "'", line_no);
    }
  }

  TriMesh mesh;
  bool has_label_prop = false;
  PlyValueReader reader(data, pos, binary, line_no + 1);
  std::vector<std::uint32_t> poly;
  for (const auto& el : elements) {
    const bool is_vertex = el.name == "vertex";
    const bool is_face = el.name == "face";
    int ix = -1, iy = -1, iz = -1;
    for (std::size_t k = 0; k < el.props.size(); ++k) {
      if (el.props[k].name == "x") ix = static_cast<int>(k);
      if (el.props[k].name == "y") iy = static_cast<int>(k);
      if (el.props[k].name == "z") iz = static_cast<int>(k);
      if (is_face && el.props[k].name == "label") has_label_prop = true;
    }
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0))
      throw FormatError("vertex element lacks x/y/z", line_no);
    if (is_vertex) mesh.vertices.reserve(el.count);
    for (std::size_t n = 0; n < el.count; ++n) {
      Vec3 v = Vec3::Zero();
      int label = kUnlabeled;
      poly.clear();
      for (std::size_t k = 0; k < el.props.size(); ++k) {
        const auto& p = el.props[k];
        if (p.is_list) {
          const double cnt = reader.read(p.count_type);
          if (cnt < 0) throw FormatError("negative list length", reader.location());
          for (std::size_t m = 0; m < static_cast<std::size_t>(cnt); ++m) {
            const double idx = reader.read(p.type);
            if (is_face && (p.name == "vertex_indices" || p.name == "vertex_index")) {
              if (idx < 0) throw FormatError("negative face index", reader.location());
              poly.push_back(static_cast<std::uint32_t>(idx));
            }
          }
        } else {
          const double val = reader.read(p.type);
          if (is_vertex) {
            if (static_cast<int>(k) == ix) v.x() = val;
            if (static_cast<int>(k) == iy) v.y() = val;
            if (static_cast<int>(k) == iz) v.z() = val;
          }
          if (is_face && p.name == "label") label = static_cast<int>(val);
        }
      }
      if (is_vertex) mesh.vertices.push_back(v);
      if (is_face) push_polygon(mesh, poly, label, has_label_prop, reader.location());
    }
  }
  return mesh;
}

}  // namespace

TriMesh load_mesh(const fs::path& path, MeshFormat format, const LabelTable* labels) {
  const std::string text = read_file(path);
  TriMesh mesh = format == MeshFormat::Obj ? parse_obj(text, labels) : parse_ply(text);
  mesh.validate();
  return mesh;
}

TriMesh load_mesh(const fs::path& path, const LabelTable* labels) {
  return load_mesh(path, format_from_path(path), labels);
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string label_name(int id, const LabelTable* labels) {
  if (labels) {
    for (const auto& [name, value] : *labels)
      if (value == id) return name;
  }
  return "label_" + std::to_string(id);
}

}  // namespace

void write_obj(const fs::path& path, const TriMesh& mesh, const LabelTable* labels) {
  std::string out;
  out.reserve(mesh.vertices.size() * 48 + mesh.faces.size() * 24);
  for (const Vec3& v : mesh.vertices)
    out += "v " + fmt_double(v.x()) + ' ' + fmt_double(v.y()) + ' ' + fmt_double(v.z()) + '\n';
  int current = kUnlabeled - 1;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (mesh.has_labels() && mesh.face_labels[f] != current) {
      current = mesh.face_labels[f];
      out += "g " + (current == kUnlabeled ? std::string("unlabeled") : label_name(current, labels)) +
             '\n';
    }
    const Face& t = mesh.faces[f];
    out += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' +
           std::to_string(t[2] + 1) + '\n';
  }
  write_atomically(path, out);
}

void write_ply(const fs::path& path, const TriMesh& mesh, PlyEncoding encoding) {
  const bool binary = encoding == PlyEncoding::BinaryLittleEndian;
  std::string out = "ply\nformat ";
  out += binary ? "binary_little_endian 1.0\n" : "ascii 1.0\n";
  out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  out += "element face " + std::to_string(mesh.faces.size()) + "\n";
  out += "property list uchar uint vertex_indices\n";
  if (mesh.has_labels()) out += "property int label\n";
  out += "end_header\n";
  auto put = [&out](const auto& value) {
    const char* p = reinterpret_cast<const char*>(&value);
    out.append(p, sizeof(value));
  };
  for (const Vec3& v : mesh.vertices) {
    if (binary) {
      put(v.x()), put(v.y()), put(v.z());
    } else {
      out += fmt_double(v.x()) + ' ' + fmt_double(v.y()) + ' ' + fmt_double(v.z()) + '\n';
    }
  }
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& t = mesh.faces[f];
    if (binary) {
      put(std::uint8_t{3});
      put(t[0]), put(t[1]), put(t[2]);
      if (mesh.has_labels()) put(static_cast<std::int32_t>(mesh.face_labels[f]));
    } else {
      out += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]);
      if (mesh.has_labels()) out += ' ' + std::to_string(mesh.face_labels[f]);
      out += '\n';
    }
  }
  write_atomically(path, out);
}

void write_mesh(const fs::path& path, const TriMesh& mesh, const LabelTable* labels) {
  if (format_from_path(path) == MeshFormat::Obj) write_obj(path, mesh, labels);
  else write_ply(path, mesh);
}

LabelTable load_label_table(const fs::path& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("label table: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw FormatError("label table must be a JSON object", 0);
  LabelTable table;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number_integer())
      throw FormatError("label '" + it.key() + "' is not an integer", 0);
    table[it.key()] = it.value().get<int>();
  }
  return table;
}

void write_label_table(const fs::path& path, const LabelTable& table) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, id] : table) j[name] = id;
  write_atomically(path, j.dump(2) + "\n");
}

}  // namespace scenegrasp
