// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#include "hifinet/freqdecomp.hpp"

#include <cmath>

namespace hifinet::freq {

Var decompose(Tape& t, Var h_s, Var h_s_low) { return t.sub(h_s, h_s_low); }

Matrix normalized_adjacency_with_self(const Matrix& a_s) {
  if (a_s.rows() != a_s.cols()) {
    throw ShapeError("normalized_adjacency_with_self: adjacency must be square, got " +
                     a_s.shape_str());
  }
  const int n = a_s.rows();
  Matrix a = a_s;
  for (int i = 0; i < n; ++i) a(i, i) += 1.0;
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) sum += a(i, j);
    for (int j = 0; j < n; ++j) a(i, j) /= sum;  // sum >= 1 from the self-loop
  }
  return a;
}

Var tgt_attention(Tape& t, Var h, Var a_hat, const TgtBlockVars& block, Var alpha) {
  const int d = t.value(h).cols();
  Var q = t.matmul(h, block.w_q);
  Var k = t.matmul(h, block.w_k);
  Var global = t.softmax_rows(
      t.scale(t.matmul(q, t.transpose(k)), 1.0 / std::sqrt(static_cast<double>(d))));
  Var one_minus_alpha = t.affine(alpha, -1.0, 1.0);
  return t.add(t.scale_by(global, alpha), t.scale_by(a_hat, one_minus_alpha));
}

Var tgt_block(Tape& t, Var h, Var a_hat, const TgtBlockVars& block, Var alpha,
              double ln_eps) {
  Var att = tgt_attention(t, h, a_hat, block, alpha);
  Var v = t.matmul(h, block.w_v);
  Var h_tilde = t.layer_norm(t.add(t.matmul(att, v), h), block.ln1_gain, block.ln1_bias,
                             ln_eps);
  Var ffn = t.add_row_broadcast(
      t.matmul(t.relu(t.add_row_broadcast(t.matmul(h_tilde, block.ffn_w1), block.ffn_b1)),
               block.ffn_w2),
      block.ffn_b2);
  return t.layer_norm(t.add(ffn, h_tilde), block.ln2_gain, block.ln2_bias, ln_eps);
}

Var tgt(Tape& t, Var h, Var a_hat, const TgtStreamVars& stream, double ln_eps) {
  if (stream.blocks.empty()) {
    throw ConfigError("tgt: stream must have at least one block");
  }
  Var alpha = t.sigmoid(stream.alpha_logit);
  Var cur = h;
  for (const auto& block : stream.blocks) {
    cur = tgt_block(t, cur, a_hat, block, alpha, ln_eps);
  }
  return cur;
}

Var reconstruct(Tape& t, Var h_low_updated, Var h_high_updated, Var beta_logit) {
  Var beta = t.sigmoid(beta_logit);
  Var one_minus_beta = t.affine(beta, -1.0, 1.0);
  return t.add(t.scale_by(h_low_updated, beta), t.scale_by(h_high_updated, one_minus_beta));
}

}  // namespace hifinet::freq
