#pragma once

#include <stdexcept>
#include <string>

namespace mmgf {

// Contract violations in inputs, configs, or file contents. The CLI maps
// these to exit code 1; everything else unexpected maps to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

// Failures of the environment or of internal numeric sanity (I/O trouble,
// NaN losses, ...). CLI exit code 2.
class RuntimeFailure : public std::runtime_error {
 public:
  explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mmgf
