#pragma once

#include <stdexcept>
#include <string>

namespace obslearn {

/// Invalid configuration or command-line input. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent data: bad records, parse failures, domain
/// violations of statistical inputs. CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An estimator or solver failed to converge. CLI exit code 4.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace obslearn
