#pragma once

#include <stdexcept>
#include <string>

namespace bknn {

// Invalid configuration: bad hyperparameters, bad flags, inconsistent sizes.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (files, rows, labels, dimensions).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Observation/family mismatch or a collapsed (all -inf) posterior.
struct ModelError : std::runtime_error {
  explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bknn
