#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace lrf {

/// Invalid layer/network/file configuration (bad shapes, bad enum values,
/// unsupported kernel geometry).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called outside its contract (e.g. backward on a
/// non-scalar, reusing a spent tape).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values appeared where the engine guarantees finite ones.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File and image I/O failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void config_check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

inline void usage_check(bool ok, const std::string& msg) {
  if (!ok) throw UsageError(msg);
}

}  // namespace lrf
