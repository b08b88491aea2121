#pragma once

#include <stdexcept>
#include <string>

namespace relex {

// Error categories map onto the CLI exit codes:
// ConfigError -> 1, DataError -> 2, ModelError -> 3.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace relex
