#pragma once

#include <stdexcept>
#include <string>

namespace nbr {

// Failures split into caller mistakes (bad configuration, out-of-range
// parameters) and bad input data (files, non-finite values, degenerate rows).
// The CLI maps these onto exit codes 1 and 2.
class Error : public std::runtime_error {
 public:
  enum class Kind { kConfig, kData };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Kind::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Kind::kData, what) {}
};

}  // namespace nbr
