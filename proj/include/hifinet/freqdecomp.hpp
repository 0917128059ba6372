// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0
//
// Decomposition-updating-reconstruction of segment features: low/high band
// split by subtraction, per-band topology-aware graph transformer streams,
// and the learnable convex recombination.

#pragma once

#include <vector>

#include "hifinet/tape.hpp"

namespace hifinet::freq {

struct TgtBlockVars {
  Var w_q, w_k, w_v;                    // d x d
  Var ffn_w1, ffn_b1, ffn_w2, ffn_b2;   // d -> d_ff -> d
  Var ln1_gain, ln1_bias, ln2_gain, ln2_bias;  // 1 x d
};

/// One TGT stream: N blocks plus the stream's shared mixing logit
/// (alpha = sigmoid(alpha_logit), so alpha is always in (0,1)).
struct TgtStreamVars {
  std::vector<TgtBlockVars> blocks;
  Var alpha_logit;  // 1 x 1
};

/// H_S^h = H_S - H_S^l (exact identity H_S = low + high).
Var decompose(Tape& t, Var h_s, Var h_s_low);

/// Row-normalized A_S + I; keeps the local mixing operator row-stochastic.
Matrix normalized_adjacency_with_self(const Matrix& a_s);

/// ATT = alpha softmax(Q K^T / sqrt(d)) + (1 - alpha) A_hat. Rows sum to 1
/// whenever A_hat is row-stochastic.
Var tgt_attention(Tape& t, Var h, Var a_hat, const TgtBlockVars& block, Var alpha);

/// V = H W_v; Ht = LN(ATT V + H); out = LN(FFN(Ht) + Ht).
Var tgt_block(Tape& t, Var h, Var a_hat, const TgtBlockVars& block, Var alpha,
              double ln_eps);

/// Sequential application of all blocks (N >= 1).
Var tgt(Tape& t, Var h, Var a_hat, const TgtStreamVars& stream, double ln_eps);

/// H_hat = beta H_low + (1 - beta) H_high for a 1x1 beta node.
Var reconstruct_mix(Tape& t, Var h_low_updated, Var h_high_updated, Var beta);

/// Same with beta = sigmoid(beta_logit), keeping beta in (0,1).
Var reconstruct(Tape& t, Var h_low_updated, Var h_high_updated, Var beta_logit);

}  // namespace hifinet::freq
