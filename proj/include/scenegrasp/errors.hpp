#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scenegrasp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `location` is a 1-based line for text formats
/// and a byte offset for binary ones.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t location)
      : Error(what + " (at " + std::to_string(location) + ")"), location_(location) {}
  std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

/// A value violates a type invariant (bad face index, degenerate face, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration or out-of-budget request (e.g. voxel grid too large).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A search or placement found no admissible answer.
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

}  // namespace scenegrasp
