// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#include "hifinet/training.hpp"

#include <cmath>
#include <sstream>

namespace hifinet::training {

namespace {

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (int i = 0; i < m.rows(); ++i) {
    int arg = 0;
    double best = m(i, 0);
    for (int j = 1; j < m.cols(); ++j) {
      if (m(i, j) > best) {
        best = m(i, j);
        arg = j;
      }
    }
    out[static_cast<std::size_t>(i)] = arg;
  }
  return out;
}

Var infonce_level(Tape& t, Var h_child, Var h_parent, const Matrix& assign_values,
                  double tau) {
  const std::vector<int> parents = argmax_rows(assign_values);
  Var sims = t.matmul(t.row_l2_normalize(h_child), t.transpose(t.row_l2_normalize(h_parent)));
  return t.cross_entropy_rows(t.scale(sims, 1.0 / tau), parents);
}

Var mean_row_entropy(Tape& t, Var assign) {
  const int rows = t.value(assign).rows();
  return t.scale(t.sum_all(t.xlogx(assign)), -1.0 / rows);
}

}  // namespace

Var alignment_loss(Tape& t, Var h_s, Var h_l, Var a_sl, Var h_r, Var a_lr, double tau) {
  if (!(tau > 0.0)) throw ConfigError("alignment_loss: tau must be > 0");
  Var sl = infonce_level(t, h_s, h_l, t.value(a_sl), tau);
  Var lr = infonce_level(t, h_l, h_r, t.value(a_lr), tau);
  return t.scale(t.add(sl, lr), 0.5);
}

Var reconstruction_loss(Tape& t, Var h_hat, Var h_s) {
  const int n = t.value(h_s).rows();
  Var diff = t.sub(h_hat, h_s);
  return t.scale(t.sum_all(t.hadamard(diff, diff)), 1.0 / n);
}

Var semantic_loss(Tape& t, Var h_hat, const Matrix& a_s, const Matrix& od, double lambda,
                  bool normalized_gram) {
  if (lambda < 0.0 || lambda > 1.0) throw ConfigError("semantic_loss: lambda in [0, 1]");
  const int n = t.value(h_hat).rows();
  if (a_s.rows() != n || od.rows() != n) {
    throw ShapeError("semantic_loss: target shapes " + a_s.shape_str() + " / " +
                     od.shape_str() + " vs features with " + std::to_string(n) + " rows");
  }
  Matrix target = add(scale(a_s, lambda), scale(od, 1.0 - lambda));
  Var rows = normalized_gram ? t.row_l2_normalize(h_hat) : h_hat;
  Var gram = t.matmul(rows, t.transpose(rows));
  Var diff = t.sub(gram, t.constant(std::move(target)));
  return t.scale(t.sum_all(t.hadamard(diff, diff)), 1.0 / (static_cast<double>(n) * n));
}

Var entropy_loss(Tape& t, Var a_sl, Var a_lr) {
  return t.scale(t.add(mean_row_entropy(t, a_sl), mean_row_entropy(t, a_lr)), 0.5);
}

Var total_loss(Tape& t, Var align, Var rec, Var sem, Var ent, const LossWeights& w) {
  w.validate();
  Var acc = t.scale(align, w.gamma1);
  acc = t.add(acc, t.scale(rec, w.gamma2));
  acc = t.add(acc, t.scale(sem, w.gamma3));
  return t.add(acc, t.scale(ent, w.gamma4));
}

LossNodes compute_losses(Tape& t, const model::ForwardState& state,
                         const model::Dataset& data, const TrainConfig& cfg) {
  LossNodes losses;
  losses.align = alignment_loss(t, state.h_s, state.h_l, state.a_sl, state.h_r, state.a_lr,
                                cfg.weights.tau);
  losses.rec = reconstruction_loss(t, state.h_hat, state.h_s);
  losses.sem = semantic_loss(t, state.h_hat, data.a_s, data.od, cfg.weights.lambda,
                             cfg.semantic_gram == "normalized");
  losses.ent = entropy_loss(t, state.a_sl, state.a_lr);
  losses.total = total_loss(t, losses.align, losses.rec, losses.sem, losses.ent, cfg.weights);
  return losses;
}

void adam_step(ParamStore& params, const std::map<std::string, Matrix>& grads,
               AdamState& state, double lr, double beta1, double beta2, double eps) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (auto& [name, value] : params.all()) {
    const auto git = grads.find(name);
    if (git == grads.end()) {
      throw ContractError("adam_step: missing gradient for '" + name + "'");
    }
    const Matrix& g = git->second;
    if (!g.is_finite()) {
      throw NumericError("adam_step: non-finite gradient for '" + name + "'");
    }
    auto mit = state.m.find(name);
    if (mit == state.m.end()) {
      mit = state.m.emplace(name, Matrix(value.rows(), value.cols())).first;
      state.v.emplace(name, Matrix(value.rows(), value.cols()));
    }
    Matrix& m = mit->second;
    Matrix& v = state.v.at(name);
    for (int i = 0; i < value.size(); ++i) {
      const double gi = g.data()[i];
      m.data()[i] = beta1 * m.data()[i] + (1.0 - beta1) * gi;
      v.data()[i] = beta2 * v.data()[i] + (1.0 - beta2) * gi * gi;
      const double mhat = m.data()[i] / bc1;
      const double vhat = v.data()[i] / bc2;
      value.data()[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

std::string LossTrace::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,align,rec,sem,ent,total\n";
  for (std::size_t e = 0; e < epochs.size(); ++e) {
    const LossRecord& r = epochs[e];
    out << e << "," << r.align << "," << r.rec << "," << r.sem << "," << r.ent << ","
        << r.total << "\n";
  }
  return out.str();
}

namespace {

LossRecord record_from(const Tape& t, const LossNodes& losses) {
  LossRecord r;
  r.align = t.value(losses.align)(0, 0);
  r.rec = t.value(losses.rec)(0, 0);
  r.sem = t.value(losses.sem)(0, 0);
  r.ent = t.value(losses.ent)(0, 0);
  r.total = t.value(losses.total)(0, 0);
  return r;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const model::Dataset& data, std::uint64_t seed) {
  cfg.validate(data.n_segments());
  TrainResult result;
  result.params = model::init_params(cfg, data, seed);
  AdamState adam;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape t;
    auto bound = bind_params(t, result.params);
    model::ForwardState state = model::forward(t, bound, data, cfg);
    LossNodes losses = compute_losses(t, state, data, cfg);
    const LossRecord record = record_from(t, losses);
    if (!std::isfinite(record.total)) {
      throw NumericError("train: loss diverged at epoch " + std::to_string(epoch));
    }
    result.trace.epochs.push_back(record);
    t.backward(losses.total);
    std::map<std::string, Matrix> grads;
    for (const auto& [name, var] : bound) grads.emplace(name, t.grad(var));
    adam_step(result.params, grads, adam, cfg.lr);
  }
  return result;
}

LossRecord evaluate_losses(const ParamStore& params, const TrainConfig& cfg,
                           const model::Dataset& data) {
  Tape t;
  auto bound = bind_params(t, params);
  model::ForwardState state = model::forward(t, bound, data, cfg);
  LossNodes losses = compute_losses(t, state, data, cfg);
  return record_from(t, losses);
}

Matrix compute_embeddings(const ParamStore& params, const TrainConfig& cfg,
                          const model::Dataset& data) {
  Tape t;
  auto bound = bind_params(t, params);
  model::ForwardState state = model::forward(t, bound, data, cfg);
  return t.value(state.h_hat);
}

}  // namespace hifinet::training
