// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "hifinet/errors.hpp"

namespace hifinet {

struct LossWeights {
  double gamma1 = 1.0;  // alignment
  double gamma2 = 1.0;  // reconstruction
  double gamma3 = 1.0;  // semantic
  double gamma4 = 1.0;  // entropy
  double tau = 0.2;     // alignment temperature, > 0
  double lambda = 0.5;  // semantic topology/OD balance, in [0, 1]

  void validate() const;
};

struct TrainConfig {
  int d = 16;
  int d_id = 4, d_ln = 4, d_sl = 4, d_ll = 4;
  int d_ff = 32;
  // 0 means auto: scale with the instance, capped at the large-input
  // defaults N_L = 200 and N_R = 30.
  int n_l = 0;
  int n_r = 0;
  int n_blocks = 2;
  int k_neighbors = 8;
  double lr = 1e-3;
  int epochs = 500;
  std::uint64_t seed = 42;
  LossWeights weights;
  bool share_gat = false;
  std::string tgt_adjacency = "normalized";  // "raw" keeps the binary A_S
  std::string semantic_gram = "normalized";  // "raw" uses the unnormalized Gram
  bool od_from_train_only = true;
  int len_bins = 16;  // quantile bins for the length embedding
  int geo_grid = 8;   // G; geo embedding has G*G cells

  int d_prime() const { return d_id + d_ln + d_sl + d_ll; }
  int resolved_n_l(int n_segments) const;
  int resolved_n_r(int n_segments) const;
  /// Checks dims and N_R < N_L < N_S for the resolved sizes.
  void validate(int n_segments) const;
};

/// Strict parse: unknown keys are errors.
TrainConfig config_from_json(const std::string& text);
std::string config_to_json(const TrainConfig& cfg);

}  // namespace hifinet
