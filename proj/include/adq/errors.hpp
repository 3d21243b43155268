#pragma once

#include <stdexcept>
#include <string>

namespace adq {

/// Bad parameters, labels, or shapes. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Requested size exceeds the desk-scale limits.
class ResourceLimit : public ConfigError {
public:
  using ConfigError::ConfigError;
};

/// Solver breakdown, tolerance violation, norm underflow. Exit code 3.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace adq
