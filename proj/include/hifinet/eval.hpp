// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0
//
// Downstream label classification over frozen embeddings: one-vs-rest
// logistic regression with macro F1 and macro AUC.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hifinet/matrix.hpp"
#include "hifinet/roadnet.hpp"

namespace hifinet::eval {

struct LogisticHyper {
  double lr = 0.1;
  int iterations = 500;
  double l2 = 1e-4;
};

/// One-vs-rest weights, one row per class, last column is the bias.
struct LogisticModel {
  Matrix weights;  // C x (d + 1)
  int n_classes() const { return weights.rows(); }
};

/// Full-batch gradient descent with l2 penalty; deterministic (zero init).
/// Every class in [0, C) must appear in the training split.
LogisticModel fit_logistic(const Matrix& emb, const std::vector<int>& labels,
                           const std::vector<int>& train_idx, int n_classes,
                           const LogisticHyper& hyper = {});

/// P(class c | row i) under the one-vs-rest sigmoid head.
double class_score(const LogisticModel& model, const Matrix& emb, int row, int cls);
int predict(const LogisticModel& model, const Matrix& emb, int row);

/// Mann-Whitney AUC; ties count one half. Both classes must be present.
double auc_score(const std::vector<double>& scores, const std::vector<int>& binary_labels);

/// Macro-averaged F1 over classes [0, C), 0/0 := 0 per class.
double f1_score_macro(const std::vector<int>& predictions, const std::vector<int>& labels,
                      int n_classes);

struct PerClassMetrics {
  int cls = 0;
  double f1 = 0.0;
  std::optional<double> auc;  // absent when the test split lacks the class
};

struct MetricsReport {
  double macro_f1 = 0.0;
  double macro_auc = 0.0;
  std::vector<PerClassMetrics> per_class;
};

/// Fits the logistic head on the train split and reports macro F1 and
/// one-vs-rest macro AUC on the test split.
MetricsReport classify_report(const Matrix& emb, const std::vector<int>& labels,
                              const roadnet::IndexSplit& split, std::uint64_t seed);

std::string metrics_to_json(const MetricsReport& report);

}  // namespace hifinet::eval
