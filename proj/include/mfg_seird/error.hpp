#pragma once

#include <stdexcept>
#include <string>

namespace mfg_seird {

/// Invalid parameters, malformed configuration files, bad inputs.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical solve failed (non-convergence, instability, exhaustion).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

}  // namespace mfg_seird
