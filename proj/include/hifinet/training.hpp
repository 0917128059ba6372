// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0
//
// The four loss terms, the weighted objective, Adam, and the deterministic
// full-batch training loop.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hifinet/config.hpp"
#include "hifinet/model.hpp"
#include "hifinet/tape.hpp"

namespace hifinet::training {

/// InfoNCE over cosine similarities; the parent of each child is the argmax
/// of its assignment row (ties to the lowest index, not differentiated
/// through). Returns (L_SL + L_LR) / 2.
Var alignment_loss(Tape& t, Var h_s, Var h_l, Var a_sl, Var h_r, Var a_lr, double tau);

/// Mean squared l2 row distance between reconstruction and original.
Var reconstruction_loss(Tape& t, Var h_hat, Var h_s);

/// || Gram(H_hat) - (lambda A_S + (1-lambda) O_S) ||_F^2 / N_S^2. The Gram
/// matrix uses l2-normalized rows unless normalized_gram is false.
Var semantic_loss(Tape& t, Var h_hat, const Matrix& a_s, const Matrix& od, double lambda,
                  bool normalized_gram);

/// Mean row entropy of the two assignment matrices, averaged.
Var entropy_loss(Tape& t, Var a_sl, Var a_lr);

struct LossNodes {
  Var align, rec, sem, ent, total;
};

LossNodes compute_losses(Tape& t, const model::ForwardState& state,
                         const model::Dataset& data, const TrainConfig& cfg);

/// gamma1 L_align + gamma2 L_rec + gamma3 L_sem + gamma4 L_ent.
Var total_loss(Tape& t, Var align, Var rec, Var sem, Var ent, const LossWeights& w);

struct AdamState {
  std::map<std::string, Matrix> m, v;
  long step = 0;
};

/// Standard bias-corrected update. Throws NumericError naming the parameter
/// on any non-finite gradient.
void adam_step(ParamStore& params, const std::map<std::string, Matrix>& grads,
               AdamState& state, double lr, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8);

struct LossRecord {
  double align = 0, rec = 0, sem = 0, ent = 0, total = 0;
};

struct LossTrace {
  std::vector<LossRecord> epochs;
  std::string to_csv() const;  // epoch,align,rec,sem,ent,total
};

struct TrainResult {
  ParamStore params;
  LossTrace trace;
};

/// Full-batch epochs: forward, losses, backward, Adam. Deterministic in
/// (config, data, seed). Aborts with the epoch index if the loss diverges.
TrainResult train(const TrainConfig& cfg, const model::Dataset& data, std::uint64_t seed);

/// One forward pass at the stored parameters; used for resume checks.
LossRecord evaluate_losses(const ParamStore& params, const TrainConfig& cfg,
                           const model::Dataset& data);

/// Reconstructed segment embeddings H_hat at the stored parameters.
Matrix compute_embeddings(const ParamStore& params, const TrainConfig& cfg,
                          const model::Dataset& data);

}  // namespace hifinet::training
