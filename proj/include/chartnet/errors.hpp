#pragma once

#include <stdexcept>
#include <string>

namespace chartnet {

// Exit codes used by the CLI: 0 success, 2 precondition violation,
// 3 resource cap, 4 IO failure.

struct PreconditionError : std::runtime_error {
  explicit PreconditionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : PreconditionError {
  explicit DimensionError(const std::string& msg) : PreconditionError(msg) {}
};

struct CoverageError : PreconditionError {
  explicit CoverageError(const std::string& msg) : PreconditionError(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ResourceError : std::runtime_error {
  explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace chartnet
