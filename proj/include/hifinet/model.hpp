// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0
//
// Full-model assembly: dataset preparation, parameter initialization, and the
// forward pass producing every intermediate of the hierarchy and the
// frequency-decomposition pipeline.

#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "hifinet/config.hpp"
#include "hifinet/freqdecomp.hpp"
#include "hifinet/hierarchy.hpp"
#include "hifinet/roadnet.hpp"
#include "hifinet/tape.hpp"

namespace hifinet::model {

/// Immutable per-run view of the data: adjacency, OD target, embedding bins.
struct Dataset {
  roadnet::RoadNetwork network;
  roadnet::TrajectorySet trajectories;
  Matrix a_s;     // binary segment adjacency
  Matrix a_hat;   // TGT local operator (normalized or raw per config)
  Matrix od;      // O_S, row-stochastic
  hierarchy::EmbeddingLayout layout;
  hierarchy::SegmentBins bins;

  int n_segments() const { return network.n_segments(); }

  static Dataset build(roadnet::RoadNetwork net, roadnet::TrajectorySet trajs,
                       const TrainConfig& cfg);
};

/// All learnable tensors, named and initialized deterministically from seed.
ParamStore init_params(const TrainConfig& cfg, const Dataset& data, std::uint64_t seed);

struct ForwardState {
  Var v_s, h_s;
  Var a_sl, h_l, a_l;
  Var a_lr, h_r, a_r;
  Var h_s_low, h_s_high;
  Var h_low_updated, h_high_updated;
  Var h_hat;
};

ForwardState forward(Tape& t, const std::map<std::string, Var>& params,
                     const Dataset& data, const TrainConfig& cfg);

}  // namespace hifinet::model
