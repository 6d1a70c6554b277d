// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exception types shared by every module.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dpfl {

/// Incompatible matrix or vector shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A distribution or algorithm parameter is outside its domain.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A result would contain NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Method hyperparameters do not fit the layers they are attached to.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Noise calibration could not meet the privacy budget.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Secure aggregation inputs are inconsistent.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (CSV, labels, feature dimensions).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experiment configuration failed validation. Carries one message per
/// offending field, each prefixed with the field's dotted path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out;
    for (const auto& issue : issues) {
      if (!out.empty()) out += '\n';
      out += issue;
    }
    return out;
  }

  std::vector<std::string> issues_;
};

}  // namespace dpfl
