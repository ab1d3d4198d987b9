#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "scenegrasp/log.hpp"

int main(int argc, char** argv) {
  // Sample-level progress lines would drown the test report.
  scenegrasp::set_log_level(scenegrasp::LogLevel::Error);
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
