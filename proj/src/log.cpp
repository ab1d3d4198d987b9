#include "scenegrasp/io_util.hpp"
#include "scenegrasp/log.hpp"

#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "scenegrasp/errors.hpp"

namespace scenegrasp {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomically(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {
std::mutex g_log_mutex;
LogLevel g_threshold = LogLevel::Info;

const char* level_name(LogLevel l) {
  switch (l) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warn: return "warn";
    case LogLevel::Error: return "error";
  }
  return "info";
}
}  // namespace

void set_log_level(LogLevel level) { g_threshold = level; }

void log_event(LogLevel level, const std::string& msg, nlohmann::json fields) {
  if (static_cast<int>(level) < static_cast<int>(g_threshold)) return;
  nlohmann::json line = {{"level", level_name(level)}, {"msg", msg}};
  if (fields.is_object()) line.update(fields);
  const std::string text = line.dump() + "\n";
  std::lock_guard lock(g_log_mutex);
  std::cerr << text;
}

}  // namespace scenegrasp
