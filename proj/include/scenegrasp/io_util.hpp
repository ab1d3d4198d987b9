#pragma once

#include <filesystem>
#include <string>

namespace scenegrasp {

std::string read_file(const std::filesystem::path& path);

/// Writes to `<path>.tmp` then renames over `path`, so readers never observe
/// a partially written file.
void write_atomically(const std::filesystem::path& path, const std::string& bytes);

}  // namespace scenegrasp
