#pragma once

#include <stdexcept>
#include <string>

namespace urn {

/// Bad arguments, inconsistent shapes, violated invariants. CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Missing or malformed files, failed reads/writes. CLI maps this to exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace urn
