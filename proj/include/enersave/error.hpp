#pragma once

#include <stdexcept>
#include <string>

namespace enersave {

// Base error for everything raised by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration or invalid parameters (CLI exit code 2).
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// Malformed or inconsistent input data (CLI exit code 3).
struct DataError : Error {
  explicit DataError(const std::string& what) : Error(what) {}
};

}  // namespace enersave
