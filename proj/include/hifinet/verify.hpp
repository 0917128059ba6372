// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0
//
// The spectral verification suite: randomized coarsening identity checks,
// assignment orthonormality and projection bounds, energy-preservation
// sub-cases, and the documented 4-path counterexample to the universal
// energy inequality.

#pragma once

#include <cstdint>
#include <string>

#include "hifinet/spectral.hpp"

namespace hifinet::spectral {

struct VerifySummary {
  // L_Y = A_XY L_X A_XY^T over random connected equi-partitioned graphs.
  int lemma1_instances = 0;
  double lemma1_max_deviation = 0.0;
  bool lemma1_pass = false;

  // A_XY A_XY^T = I and P = A_XY^T A_XY is a bounded projection.
  double orthonormality_max_deviation = 0.0;
  double projection_idempotency_max_deviation = 0.0;
  double projection_eig_min = 0.0;
  double projection_eig_max = 0.0;
  bool orthonormality_pass = false;

  // Energy sub-cases over random instances.
  int energy_instances = 0;
  double piecewise_max_deviation = 0.0;
  bool piecewise_pass = false;
  double top_eigvec_max_excess = 0.0;  // max(E_Y - E_X) for z = u_n
  bool top_eigvec_pass = false;

  // Fixed 4-path counterexample: E_X = 6, E_Y = 9, ratio 1.5.
  EnergyTrial documented;
  bool documented_reproduced = false;

  // Random-signal distribution on a demonstration graph (recorded only).
  EnergyReport demo_report;

  bool pass = false;
  std::string to_json() const;
};

/// Runs the whole suite. `trials` controls only the recorded random-signal
/// distribution; the asserted checks always use their own instance counts.
VerifySummary run_verification(std::uint64_t seed, int trials);

/// Random connected undirected graph (spanning tree plus extras) with a
/// shuffled equi-partition; used by the verifier and by tests.
struct VerifyInstance {
  Matrix adjacency;
  Partition partition;
};
VerifyInstance random_instance(std::uint64_t seed, int min_n = 4, int max_n = 64);

}  // namespace hifinet::spectral
