// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#include "hifinet/grad_check.hpp"

#include <cmath>

namespace hifinet {

namespace {

double evaluate(ParamStore& store, const ForwardFn& forward) {
  Tape tape;
  auto bound = bind_params(tape, store);
  Var loss = forward(tape, bound);
  const Matrix& lv = tape.value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("grad_check: forward must return a 1x1 loss, got " + lv.shape_str());
  }
  const double v = lv(0, 0);
  if (!std::isfinite(v)) {
    throw NumericError("grad_check: non-finite loss " + std::to_string(v));
  }
  return v;
}

}  // namespace

GradCheckReport grad_check(ParamStore& store, const ForwardFn& forward, double eps) {
  // Analytic pass.
  std::map<std::string, Matrix> analytic;
  {
    Tape tape;
    auto bound = bind_params(tape, store);
    Var loss = forward(tape, bound);
    const Matrix& lv = tape.value(loss);
    if (lv.rows() != 1 || lv.cols() != 1) {
      throw ContractError("grad_check: forward must return a 1x1 loss, got " + lv.shape_str());
    }
    if (!std::isfinite(lv(0, 0))) {
      throw NumericError("grad_check: non-finite loss at base point");
    }
    tape.backward(loss);
    for (const auto& [name, var] : bound) {
      analytic.emplace(name, tape.grad(var));
    }
  }

  GradCheckReport report;
  for (auto& [name, value] : store.all()) {
    const Matrix& a = analytic.at(name);
    for (int i = 0; i < value.rows(); ++i) {
      for (int j = 0; j < value.cols(); ++j) {
        const double saved = value(i, j);
        value(i, j) = saved + eps;
        const double fp = evaluate(store, forward);
        value(i, j) = saved - eps;
        const double fm = evaluate(store, forward);
        value(i, j) = saved;
        const double numeric = (fp - fm) / (2.0 * eps);
        const double ana = a(i, j);
        const double denom = std::max({1.0, std::abs(ana), std::abs(numeric)});
        const double rel = std::abs(ana - numeric) / denom;
        if (rel > report.max_rel_err) {
          report.max_rel_err = rel;
          report.worst_param = name;
          report.worst_row = i;
          report.worst_col = j;
          report.analytic = ana;
          report.numeric = numeric;
        }
      }
    }
  }
  return report;
}

}  // namespace hifinet
