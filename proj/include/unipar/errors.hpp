#pragma once

#include <stdexcept>
#include <string>

namespace unipar {

// Invalid arguments, mismatched alphabets, malformed input data.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine failed to reach its requested tolerance.
struct ToleranceError : std::runtime_error {
  explicit ToleranceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace unipar
