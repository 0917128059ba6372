// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace hifinet {

/// Operand shapes do not satisfy an operation's precondition.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A documented call contract was violated (non-scalar backward, unequal
/// cluster sizes, missing state, ...).
struct ContractError : std::runtime_error {
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: non-finite values, non-convergence.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid or unsatisfiable configuration.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file (bad JSON, out-of-range index, bad field value).
struct LoadError : std::runtime_error {
  explicit LoadError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hifinet
