#pragma once

#include <filesystem>

#include "scenegrasp/mesh.hpp"

namespace scenegrasp {

enum class MeshFormat { Obj, Ply };
enum class PlyEncoding { Ascii, BinaryLittleEndian };

/// Format from the file extension (.obj / .ply, case-insensitive).
MeshFormat format_from_path(const std::filesystem::path& path);

/// Reads an OBJ or PLY mesh. Polygons are fan-triangulated; vertex order is
/// kept. OBJ group (`g`/`o`) and `usemtl` names resolve face labels through
/// `labels`, falling back to names of the form `label_<id>`. PLY faces take
/// their label from an integer `label` property when present.
TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format,
                  const LabelTable* labels = nullptr);
TriMesh load_mesh(const std::filesystem::path& path, const LabelTable* labels = nullptr);

void write_obj(const std::filesystem::path& path, const TriMesh& mesh,
               const LabelTable* labels = nullptr);
void write_ply(const std::filesystem::path& path, const TriMesh& mesh,
               PlyEncoding encoding = PlyEncoding::BinaryLittleEndian);
void write_mesh(const std::filesystem::path& path, const TriMesh& mesh,
                const LabelTable* labels = nullptr);

LabelTable load_label_table(const std::filesystem::path& path);
void write_label_table(const std::filesystem::path& path, const LabelTable& table);

}  // namespace scenegrasp
