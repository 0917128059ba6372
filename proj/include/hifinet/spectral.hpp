// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0
//
// Graph signal processing toolkit: unnormalized Laplacians over the
// symmetrized graph, a deterministic dense symmetric eigensolver, the graph
// Fourier transform, Dirichlet energy, and hard equi-partition coarsening
// with its energy-preservation checks.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hifinet/matrix.hpp"

namespace hifinet::spectral {

struct SpectralBasis {
  std::vector<double> eigenvalues;  // ascending
  Matrix eigenvectors;              // orthonormal columns, column j pairs with eigenvalues[j]
  int n() const { return static_cast<int>(eigenvalues.size()); }
};

struct Partition {
  std::vector<std::vector<int>> clusters;

  int n_nodes() const;
  int n_clusters() const { return static_cast<int>(clusters.size()); }
  /// True iff clusters are a disjoint cover of [0, n).
  bool is_valid(int n) const;
  bool is_equi_partition() const;
  /// Contiguous blocks of size m over [0, n); requires m | n.
  static Partition contiguous(int n, int m);
};

struct EnergyTrial {
  double e_x = 0.0;
  double e_y = 0.0;
  double ratio = 0.0;
};

struct EnergyReport {
  int trials = 0;
  std::vector<EnergyTrial> per_trial;
  double ratio_min = 0.0, ratio_median = 0.0, ratio_mean = 0.0, ratio_max = 0.0;
  bool piecewise_constant_exact = false;  // cluster-constant signals preserve energy
  bool top_eigvec_contracts = false;      // z = u_n gives E_Y <= E_X
  bool constant_zero = false;             // constant signal gives E_X = E_Y = 0
  struct Counterexample {
    int trial;
    double ratio;
  };
  std::vector<Counterexample> counterexamples;  // random trials with ratio > 1
};

/// L = D - max(A, A^T). Directedness is dropped for spectral work.
Matrix laplacian(const Matrix& adjacency);

/// Full symmetric eigendecomposition by cyclic Jacobi, eigenvalues ascending,
/// deterministic sign convention (largest-magnitude component positive, ties
/// resolved by lowest index). Input must be symmetric within 1e-10.
SpectralBasis eigendecompose(const Matrix& l);

/// x_hat = U^T x (x is n x 1).
Matrix gft(const SpectralBasis& basis, const Matrix& x);
Matrix igft(const SpectralBasis& basis, const Matrix& x_hat);

double dirichlet_energy(const Matrix& l, const Matrix& x);

/// Projection onto the first k eigenvectors / its orthogonal complement.
struct FrequencySplit {
  Matrix low, high;
};
FrequencySplit frequency_split(const SpectralBasis& basis, const Matrix& x, int k);

/// N_Y x N_X matrix with 1/sqrt(m) on (cluster, member) pairs. Requires an
/// equi-partition; rows are exactly orthonormal.
Matrix hard_assignment(const Partition& p);

struct Coarsened {
  Matrix a_y;  // A_XY A_X A_XY^T
  Matrix l_y;  // D_Y - A_Y with D_Y from A_Y row sums
};
Coarsened coarsen(const Matrix& a_x, const Matrix& a_xy);

struct LemmaCheck {
  bool pass = false;
  double max_deviation = 0.0;
};

/// Checks L_Y (degree route) against A_XY L_X A_XY^T (projection route).
LemmaCheck verify_lemma1(const Matrix& a_x, const Partition& p, double tol);

/// For one fixed signal: E_X = z^T L_X z and E_Y with z_Y = A_XY z.
EnergyTrial energy_pair(const Matrix& a_x, const Partition& p, const Matrix& z);

/// Random unit signals plus the structured checks (piecewise-constant,
/// bottom/top eigenvector). Random ratios are recorded, never asserted;
/// ratios above 1 are listed as counterexamples to the universal inequality.
EnergyReport energy_report(const Matrix& a_x, const Partition& p, int trials,
                           std::uint64_t seed);

std::string energy_report_to_json(const EnergyReport& report);

/// Edge labels for the frequency-decomposition report: an edge is
/// high-frequency when the high-band residual at its endpoints dominates the
/// centered low band.
struct EdgeFrequency {
  int from, to;
  bool high;
};
std::vector<EdgeFrequency> classify_edge_frequency(const Matrix& adjacency,
                                                   const Matrix& signal, int k_low);

}  // namespace hifinet::spectral
