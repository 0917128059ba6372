// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#include "hifinet/verify.hpp"

#include <algorithm>
#include <cmath>

#include "hifinet/rng.hpp"
#include "json.hpp"

namespace hifinet::spectral {

VerifyInstance random_instance(std::uint64_t seed, int min_n, int max_n) {
  Rng rng(seed);
  // Pick a cluster size and count whose product lands in [min_n, max_n].
  const int m = 1 + rng.below(4);
  const int max_clusters = std::max(2, max_n / m);
  const int min_clusters = std::max(2, (min_n + m - 1) / m);
  const int clusters = min_clusters + rng.below(std::max(1, max_clusters - min_clusters + 1));
  const int n = m * clusters;

  Matrix a(n, n);
  for (int v = 1; v < n; ++v) {
    const int u = rng.below(v);
    a(u, v) = a(v, u) = 1.0;
  }
  const int extra = rng.below(n + 1);
  for (int e = 0; e < extra; ++e) {
    const int u = rng.below(n), v = rng.below(n);
    if (u != v) a(u, v) = a(v, u) = 1.0;
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);
  Partition p;
  for (int start = 0; start < n; start += m) {
    p.clusters.push_back(std::vector<int>(order.begin() + start, order.begin() + start + m));
  }
  return VerifyInstance{std::move(a), std::move(p)};
}

VerifySummary run_verification(std::uint64_t seed, int trials) {
  VerifySummary s;

  // Lemma identity, orthonormality, and projection bounds share instances.
  s.lemma1_instances = 50;
  for (int i = 0; i < s.lemma1_instances; ++i) {
    const VerifyInstance inst = random_instance(Rng::derive(seed, 100 + i));
    const LemmaCheck check = verify_lemma1(inst.adjacency, inst.partition, 1e-9);
    s.lemma1_max_deviation = std::max(s.lemma1_max_deviation, check.max_deviation);

    const Matrix a_xy = hard_assignment(inst.partition);
    const Matrix gram = matmul(a_xy, transpose(a_xy));
    s.orthonormality_max_deviation =
        std::max(s.orthonormality_max_deviation,
                 max_abs_diff(gram, Matrix::identity(gram.rows())));
    const Matrix proj = matmul(transpose(a_xy), a_xy);
    s.projection_idempotency_max_deviation =
        std::max(s.projection_idempotency_max_deviation,
                 max_abs_diff(matmul(proj, proj), proj));
    const SpectralBasis pb = eigendecompose(proj);
    if (i == 0) {
      s.projection_eig_min = pb.eigenvalues.front();
      s.projection_eig_max = pb.eigenvalues.back();
    } else {
      s.projection_eig_min = std::min(s.projection_eig_min, pb.eigenvalues.front());
      s.projection_eig_max = std::max(s.projection_eig_max, pb.eigenvalues.back());
    }
  }
  s.lemma1_pass = s.lemma1_max_deviation < 1e-9;
  s.orthonormality_pass = s.orthonormality_max_deviation < 1e-12 &&
                          s.projection_idempotency_max_deviation < 1e-12 &&
                          s.projection_eig_min >= -1e-9 &&
                          s.projection_eig_max <= 1.0 + 1e-9;

  // Energy sub-cases on fresh instances.
  s.energy_instances = 100;
  s.piecewise_pass = true;
  s.top_eigvec_pass = true;
  for (int i = 0; i < s.energy_instances; ++i) {
    const VerifyInstance inst = random_instance(Rng::derive(seed, 1000 + i));
    const int n = inst.adjacency.rows();
    Rng rng(Rng::derive(seed, 2000 + i));

    Matrix piecewise(n, 1);
    for (const auto& cluster : inst.partition.clusters) {
      const double val = rng.uniform(-2.0, 2.0);
      for (int node : cluster) piecewise(node, 0) = val;
    }
    const EnergyTrial pw = energy_pair(inst.adjacency, inst.partition, piecewise);
    s.piecewise_max_deviation =
        std::max(s.piecewise_max_deviation, std::abs(pw.e_x - pw.e_y));

    const SpectralBasis basis = eigendecompose(laplacian(inst.adjacency));
    Matrix top(n, 1);
    for (int r = 0; r < n; ++r) top(r, 0) = basis.eigenvectors(r, n - 1);
    const EnergyTrial te = energy_pair(inst.adjacency, inst.partition, top);
    s.top_eigvec_max_excess = std::max(s.top_eigvec_max_excess, te.e_y - te.e_x);
  }
  s.piecewise_pass = s.piecewise_max_deviation < 1e-9;
  s.top_eigvec_pass = s.top_eigvec_max_excess <= 1e-9;

  // Documented counterexample: path-4, clusters {0,1} and {2,3}, z = (4,3,1,0).
  {
    Matrix path(4, 4);
    for (int i = 0; i + 1 < 4; ++i) path(i, i + 1) = path(i + 1, i) = 1.0;
    Partition p;
    p.clusters = {{0, 1}, {2, 3}};
    Matrix z{{4}, {3}, {1}, {0}};
    s.documented = energy_pair(path, p, z);
    s.documented_reproduced = std::abs(s.documented.e_x - 6.0) < 1e-9 &&
                              std::abs(s.documented.e_y - 9.0) < 1e-9;
  }

  // Recorded-only random-signal distribution on a 6x6 grid, clusters of 6.
  {
    const int side = 6, n = side * side;
    Matrix grid(n, n);
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        const int id = y * side + x;
        if (x + 1 < side) grid(id, id + 1) = grid(id + 1, id) = 1.0;
        if (y + 1 < side) grid(id, id + side) = grid(id + side, id) = 1.0;
      }
    }
    s.demo_report = energy_report(grid, Partition::contiguous(n, side), trials, seed);
  }

  s.pass = s.lemma1_pass && s.orthonormality_pass && s.piecewise_pass &&
           s.top_eigvec_pass && s.documented_reproduced &&
           s.demo_report.piecewise_constant_exact && s.demo_report.top_eigvec_contracts;
  return s;
}

std::string VerifySummary::to_json() const {
  nlohmann::json j;
  j["lemma1"] = {{"instances", lemma1_instances},
                 {"max_deviation", lemma1_max_deviation},
                 {"pass", lemma1_pass}};
  j["orthonormality"] = {{"assignment_max_deviation", orthonormality_max_deviation},
                         {"projection_idempotency_max_deviation",
                          projection_idempotency_max_deviation},
                         {"projection_eig_min", projection_eig_min},
                         {"projection_eig_max", projection_eig_max},
                         {"pass", orthonormality_pass}};
  j["energy_subcases"] = {{"instances", energy_instances},
                          {"piecewise_max_deviation", piecewise_max_deviation},
                          {"piecewise_pass", piecewise_pass},
                          {"top_eigvec_max_excess", top_eigvec_max_excess},
                          {"top_eigvec_pass", top_eigvec_pass}};
  j["documented_counterexample"] = {{"e_x", documented.e_x},
                                    {"e_y", documented.e_y},
                                    {"ratio", documented.ratio},
                                    {"reproduced", documented_reproduced}};
  j["energy"] = nlohmann::json::parse(energy_report_to_json(demo_report));
  j["pass"] = pass;
  return j.dump(2);
}

}  // namespace hifinet::spectral
