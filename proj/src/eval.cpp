// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#include "hifinet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace hifinet::eval {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double raw_score(const LogisticModel& model, const Matrix& emb, int row, int cls) {
  const int d = emb.cols();
  double z = model.weights(cls, d);  // bias
  for (int j = 0; j < d; ++j) z += model.weights(cls, j) * emb(row, j);
  return z;
}

}  // namespace

LogisticModel fit_logistic(const Matrix& emb, const std::vector<int>& labels,
                           const std::vector<int>& train_idx, int n_classes,
                           const LogisticHyper& hyper) {
  if (n_classes < 2) throw ContractError("fit_logistic: need at least 2 classes");
  if (static_cast<int>(labels.size()) != emb.rows()) {
    throw ShapeError("fit_logistic: " + std::to_string(labels.size()) + " labels for " +
                     emb.shape_str() + " embeddings");
  }
  std::set<int> present;
  for (int i : train_idx) {
    if (i < 0 || i >= emb.rows()) {
      throw ContractError("fit_logistic: train index " + std::to_string(i) + " out of range");
    }
    present.insert(labels[static_cast<std::size_t>(i)]);
  }
  for (int c = 0; c < n_classes; ++c) {
    if (!present.count(c)) {
      throw ContractError("fit_logistic: class " + std::to_string(c) +
                          " missing from the train split");
    }
  }

  const int d = emb.cols();
  const int n = static_cast<int>(train_idx.size());
  LogisticModel model{Matrix(n_classes, d + 1)};
  for (int it = 0; it < hyper.iterations; ++it) {
    for (int c = 0; c < n_classes; ++c) {
      std::vector<double> grad(static_cast<std::size_t>(d) + 1, 0.0);
      for (int i : train_idx) {
        const double y = labels[static_cast<std::size_t>(i)] == c ? 1.0 : 0.0;
        const double err = sigmoid(raw_score(model, emb, i, c)) - y;
        for (int j = 0; j < d; ++j) grad[static_cast<std::size_t>(j)] += err * emb(i, j);
        grad[static_cast<std::size_t>(d)] += err;
      }
      for (int j = 0; j <= d; ++j) {
        const double g = grad[static_cast<std::size_t>(j)] / n + hyper.l2 * model.weights(c, j);
        model.weights(c, j) -= hyper.lr * g;
      }
    }
  }
  return model;
}

double class_score(const LogisticModel& model, const Matrix& emb, int row, int cls) {
  return sigmoid(raw_score(model, emb, row, cls));
}

int predict(const LogisticModel& model, const Matrix& emb, int row) {
  int best = 0;
  double best_score = raw_score(model, emb, row, 0);
  for (int c = 1; c < model.n_classes(); ++c) {
    const double s = raw_score(model, emb, row, c);
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return best;
}

double auc_score(const std::vector<double>& scores, const std::vector<int>& binary_labels) {
  if (scores.size() != binary_labels.size()) {
    throw ShapeError("auc_score: " + std::to_string(scores.size()) + " scores vs " +
                     std::to_string(binary_labels.size()) + " labels");
  }
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int y : binary_labels) n_pos += y != 0 ? 1u : 0u;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw ContractError("auc_score: both classes must be present");
  }

  // Mann-Whitney with mid-ranks for ties.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (binary_labels[order[k]] != 0) rank_sum_pos += mid_rank;
    }
    i = j + 1;
  }
  const double n_pos_d = static_cast<double>(n_pos);
  return (rank_sum_pos - n_pos_d * (n_pos_d + 1.0) / 2.0) /
         (n_pos_d * static_cast<double>(n_neg));
}

double f1_score_macro(const std::vector<int>& predictions, const std::vector<int>& labels,
                      int n_classes) {
  if (predictions.size() != labels.size()) {
    throw ShapeError("f1_score_macro: " + std::to_string(predictions.size()) +
                     " predictions vs " + std::to_string(labels.size()) + " labels");
  }
  double sum = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const bool pred_c = predictions[i] == c;
      const bool is_c = labels[i] == c;
      if (pred_c && is_c) ++tp;
      if (pred_c && !is_c) ++fp;
      if (!pred_c && is_c) ++fn;
    }
    const double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    sum += p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  return sum / n_classes;
}

MetricsReport classify_report(const Matrix& emb, const std::vector<int>& labels,
                              const roadnet::IndexSplit& split, std::uint64_t seed) {
  (void)seed;  // the head is deterministic; kept for interface stability
  int n_classes = 0;
  for (int y : labels) n_classes = std::max(n_classes, y + 1);
  const LogisticModel model = fit_logistic(emb, labels, split.train, n_classes);

  std::vector<int> test_pred, test_labels;
  for (int i : split.test) {
    test_pred.push_back(predict(model, emb, i));
    test_labels.push_back(labels[static_cast<std::size_t>(i)]);
  }

  MetricsReport report;
  report.macro_f1 = f1_score_macro(test_pred, test_labels, n_classes);

  double auc_sum = 0.0;
  int auc_count = 0;
  for (int c = 0; c < n_classes; ++c) {
    PerClassMetrics pc;
    pc.cls = c;
    std::vector<int> pred_c, labels_c;
    for (std::size_t i = 0; i < test_labels.size(); ++i) {
      pred_c.push_back(test_pred[i] == c ? 1 : 0);
      labels_c.push_back(test_labels[i] == c ? 1 : 0);
    }
    // Per-class F1 from the same confusion counts as the macro average.
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < labels_c.size(); ++i) {
      if (pred_c[i] && labels_c[i]) ++tp;
      if (pred_c[i] && !labels_c[i]) ++fp;
      if (!pred_c[i] && labels_c[i]) ++fn;
    }
    const double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    pc.f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;

    const bool has_pos = std::find(labels_c.begin(), labels_c.end(), 1) != labels_c.end();
    const bool has_neg = std::find(labels_c.begin(), labels_c.end(), 0) != labels_c.end();
    if (has_pos && has_neg) {
      std::vector<double> scores;
      for (int i : split.test) scores.push_back(class_score(model, emb, i, c));
      pc.auc = auc_score(scores, labels_c);
      auc_sum += *pc.auc;
      ++auc_count;
    }
    report.per_class.push_back(pc);
  }
  report.macro_auc = auc_count > 0 ? auc_sum / auc_count : 0.5;
  return report;
}

std::string metrics_to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["macro_f1"] = report.macro_f1;
  j["macro_auc"] = report.macro_auc;
  j["per_class"] = nlohmann::json::array();
  for (const auto& pc : report.per_class) {
    nlohmann::json c;
    c["class"] = pc.cls;
    c["f1"] = pc.f1;
    c["auc"] = pc.auc ? nlohmann::json(*pc.auc) : nlohmann::json(nullptr);
    j["per_class"].push_back(c);
  }
  return j.dump(2);
}

}  // namespace hifinet::eval
