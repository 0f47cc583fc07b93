#pragma once

#include <stdexcept>
#include <string>

namespace semsec {

/// Invalid argument values or mismatched dimensions.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed on-disk data (feature-map files, head files, config files).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerically unusable input such as non-finite activations.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A run configuration the simulator cannot honor (ISI, frame overflow, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace semsec
