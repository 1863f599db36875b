#pragma once

#include <stdexcept>
#include <string>

namespace segtopic {

// Error taxonomy matching the CLI exit-code convention:
// usage/config problems (1), malformed or inconsistent data (2),
// numeric failures such as divergence (3).
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace segtopic
