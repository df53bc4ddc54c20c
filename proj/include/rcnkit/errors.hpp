#pragma once

#include <stdexcept>
#include <string>

namespace rcnkit {

// Base error for everything the toolkit raises on purpose.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user-supplied configuration (CLI flags, config files, specs).
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Filesystem / serialization failures.
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

// Tensor / image extent mismatches; message names the offending dimension.
struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Numerical failure during training or inference (non-finite values).
struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace rcnkit
