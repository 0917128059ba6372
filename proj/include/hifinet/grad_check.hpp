// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0
//
// Finite-difference gradient oracle. Central differences against the tape,
// coordinate by coordinate, over every trainable parameter in a store.

#pragma once

#include <functional>
#include <map>
#include <string>

#include "hifinet/tape.hpp"

namespace hifinet {

/// Builds the scalar loss for the current parameter values. Called many
/// times with perturbed stores; must be deterministic.
using ForwardFn = std::function<Var(Tape&, const std::map<std::string, Var>&)>;

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_row = -1;
  int worst_col = -1;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Central differences (f(t+eps e) - f(t-eps e)) / 2 eps vs tape gradients.
/// Relative error uses max(1, |analytic|, |numeric|) as denominator.
/// Throws NumericError if any evaluation is non-finite.
GradCheckReport grad_check(ParamStore& store, const ForwardFn& forward, double eps);

}  // namespace hifinet
