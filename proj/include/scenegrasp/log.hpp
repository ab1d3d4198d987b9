#pragma once

#include <string>

#include <json.hpp>

namespace scenegrasp {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

void set_log_level(LogLevel level);

/// One JSON object per line on stderr: {"level":..,"msg":..,<fields>}.
void log_event(LogLevel level, const std::string& msg, nlohmann::json fields = {});

}  // namespace scenegrasp
