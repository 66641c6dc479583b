#pragma once

#include <stdexcept>
#include <string>

namespace cuspgrowth {

// Malformed input or a violated model constraint. The CLI maps this to exit code 1.
class ConstraintError : public std::invalid_argument {
 public:
  explicit ConstraintError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure failed to converge or exceeded its budget. Exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cuspgrowth
