// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "hifinet/rng.hpp"
#include "hifinet/spectral.hpp"

using namespace hifinet;
using namespace hifinet::spectral;

namespace {

Matrix path_adjacency(int n) {
  Matrix a(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    a(i, i + 1) = 1.0;
    a(i + 1, i) = 1.0;
  }
  return a;
}

// Random connected undirected graph: spanning tree plus extra edges.
Matrix random_connected_graph(int n, Rng& rng) {
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
  return a;
}

Partition random_equi_partition(int n, int m, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);
  Partition p;
  for (int start = 0; start < n; start += m) {
    p.clusters.push_back(
        std::vector<int>(order.begin() + start, order.begin() + start + m));
  }
  return p;
}

}  // namespace

TEST_CASE("laplacian of a 3-path by hand") {
  Matrix l = laplacian(path_adjacency(3));
  Matrix expected{{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}};
  CHECK(max_abs_diff(l, expected) == 0.0);
}

TEST_CASE("laplacian of the empty graph is zero") {
  Matrix l = laplacian(Matrix(3, 3));
  CHECK(max_abs(l) == 0.0);
}

TEST_CASE("laplacian symmetrizes directed edges") {
  Matrix directed(2, 2);
  directed(0, 1) = 1.0;
  Matrix undirected(2, 2);
  undirected(0, 1) = undirected(1, 0) = 1.0;
  CHECK(max_abs_diff(laplacian(directed), laplacian(undirected)) == 0.0);
}

TEST_CASE("laplacian rejects non-square input") {
  CHECK_THROWS_AS(laplacian(Matrix(2, 3)), ShapeError);
}

TEST_CASE("eigendecompose 2-node closed form") {
  SpectralBasis basis = eigendecompose(laplacian(path_adjacency(2)));
  CHECK(basis.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(basis.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-12));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(basis.eigenvectors(0, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-10));
  CHECK(basis.eigenvectors(1, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-10));
}

TEST_CASE("eigendecompose zero matrix") {
  SpectralBasis basis = eigendecompose(Matrix(3, 3));
  for (double ev : basis.eigenvalues) CHECK(ev == 0.0);
}

TEST_CASE("eigendecompose rejects non-symmetric input") {
  Matrix m(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(eigendecompose(m), ContractError);
}

TEST_CASE("eigendecompose basis invariants on random graphs") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(Rng::derive(21, seed));
    const int n = 3 + rng.below(20);
    Matrix l = laplacian(random_connected_graph(n, rng));
    SpectralBasis basis = eigendecompose(l);
    // Ascending, PSD.
    CHECK(basis.eigenvalues.front() >= -1e-9);
    for (int j = 1; j < n; ++j)
      CHECK(basis.eigenvalues[static_cast<std::size_t>(j)] >=
            basis.eigenvalues[static_cast<std::size_t>(j - 1)] - 1e-12);
    // U^T U = I.
    Matrix utu = matmul(transpose(basis.eigenvectors), basis.eigenvectors);
    CHECK(max_abs_diff(utu, Matrix::identity(n)) < 1e-8);
    // L U = U diag(lambda).
    Matrix lu = matmul(l, basis.eigenvectors);
    Matrix ud = basis.eigenvectors;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ud(i, j) *= basis.eigenvalues[static_cast<std::size_t>(j)];
    CHECK(max_abs_diff(lu, ud) < 1e-7);
    // Connected graph has a one-dimensional kernel.
    int zero_count = 0;
    for (double ev : basis.eigenvalues)
      if (std::abs(ev) < 1e-8) ++zero_count;
    CHECK(zero_count == 1);
  }
}

TEST_CASE("eigendecompose is deterministic including signs") {
  Rng rng(3);
  Matrix a = random_connected_graph(12, rng);
  SpectralBasis b1 = eigendecompose(laplacian(a));
  SpectralBasis b2 = eigendecompose(laplacian(a));
  CHECK(max_abs_diff(b1.eigenvectors, b2.eigenvectors) == 0.0);
}

TEST_CASE("gft of an eigenvector is a unit coefficient") {
  SpectralBasis basis = eigendecompose(laplacian(path_adjacency(5)));
  Matrix u1(5, 1);
  for (int i = 0; i < 5; ++i) u1(i, 0) = basis.eigenvectors(i, 0);
  Matrix coef = gft(basis, u1);
  CHECK(coef(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  for (int i = 1; i < 5; ++i) CHECK(std::abs(coef(i, 0)) < 1e-9);
}

TEST_CASE("igft inverts gft; Parseval; quadratic form") {
  Rng rng(8);
  Matrix a = random_connected_graph(14, rng);
  Matrix l = laplacian(a);
  SpectralBasis basis = eigendecompose(l);
  Matrix x(14, 1);
  for (int i = 0; i < 14; ++i) x(i, 0) = rng.uniform(-3.0, 3.0);

  Matrix coef = gft(basis, x);
  CHECK(max_abs_diff(igft(basis, coef), x) < 1e-9);
  CHECK(frobenius_norm(coef) == doctest::Approx(frobenius_norm(x)).epsilon(1e-9));

  double quad = 0.0;
  for (int i = 0; i < 14; ++i)
    quad += basis.eigenvalues[static_cast<std::size_t>(i)] * coef(i, 0) * coef(i, 0);
  CHECK(quad == doctest::Approx(dirichlet_energy(l, x)).epsilon(1e-9));
}

TEST_CASE("dirichlet energy on constant and path signals") {
  Matrix l = laplacian(path_adjacency(3));
  CHECK(dirichlet_energy(l, Matrix(3, 1, 5.0)) == doctest::Approx(0.0).epsilon(1e-12));
  Matrix x{{0}, {1}, {2}};
  CHECK(dirichlet_energy(l, x) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("dirichlet energy of a unit eigenvector is its eigenvalue") {
  SpectralBasis basis = eigendecompose(laplacian(path_adjacency(6)));
  Matrix l = laplacian(path_adjacency(6));
  for (int j = 0; j < 6; ++j) {
    Matrix u(6, 1);
    for (int i = 0; i < 6; ++i) u(i, 0) = basis.eigenvectors(i, j);
    CHECK(dirichlet_energy(l, u) ==
          doctest::Approx(basis.eigenvalues[static_cast<std::size_t>(j)]).epsilon(1e-9));
  }
}

TEST_CASE("frequency_split endpoints and orthogonality") {
  Rng rng(13);
  const int n = 12;
  Matrix a = random_connected_graph(n, rng);
  SpectralBasis basis = eigendecompose(laplacian(a));
  Matrix x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = rng.uniform(-1.0, 1.0);

  FrequencySplit full = frequency_split(basis, x, n);
  CHECK(max_abs_diff(full.low, x) < 1e-9);
  CHECK(max_abs(full.high) < 1e-9);

  FrequencySplit none = frequency_split(basis, x, 0);
  CHECK(max_abs(none.low) == 0.0);
  CHECK(max_abs_diff(none.high, x) == 0.0);

  FrequencySplit half = frequency_split(basis, x, n / 2);
  double inner = 0.0;
  for (int i = 0; i < n; ++i) inner += half.low(i, 0) * half.high(i, 0);
  CHECK(std::abs(inner) < 1e-9);

  CHECK_THROWS_AS(frequency_split(basis, x, n + 1), ContractError);
}

TEST_CASE("hard_assignment entries and orthonormal rows") {
  Partition p;
  p.clusters = {{0, 1}, {2, 3}};
  Matrix a = hard_assignment(p);
  const double w = 1.0 / std::sqrt(2.0);
  Matrix expected{{w, w, 0, 0}, {0, 0, w, w}};
  CHECK(max_abs_diff(a, expected) < 1e-15);

  Partition singletons;
  singletons.clusters = {{0}, {1}, {2}};
  CHECK(max_abs_diff(hard_assignment(singletons), Matrix::identity(3)) == 0.0);

  Partition unequal;
  unequal.clusters = {{0, 1}, {2}};
  CHECK_THROWS_WITH_AS(hard_assignment(unequal), doctest::Contains("equi-partition"),
                       ContractError);
}

TEST_CASE("hard_assignment orthonormality and projection properties") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(Rng::derive(31, seed));
    const int m = 1 + rng.below(4);
    const int clusters = 2 + rng.below(5);
    const int n = m * clusters;
    Partition p = random_equi_partition(n, m, rng);
    Matrix a = hard_assignment(p);

    CHECK(max_abs_diff(matmul(a, transpose(a)), Matrix::identity(clusters)) < 1e-12);

    Matrix proj = matmul(transpose(a), a);
    CHECK(max_abs_diff(matmul(proj, proj), proj) < 1e-12);
    CHECK(max_abs_diff(proj, transpose(proj)) < 1e-12);
    SpectralBasis pb = eigendecompose(proj);
    CHECK(pb.eigenvalues.front() >= -1e-9);
    CHECK(pb.eigenvalues.back() <= 1.0 + 1e-9);
  }
}

TEST_CASE("coarsen path-4 into two pairs") {
  Partition p;
  p.clusters = {{0, 1}, {2, 3}};
  Coarsened co = coarsen(path_adjacency(4), hard_assignment(p));
  Matrix a_expected{{1.0, 0.5}, {0.5, 1.0}};
  Matrix l_expected{{0.5, -0.5}, {-0.5, 0.5}};
  CHECK(max_abs_diff(co.a_y, a_expected) < 1e-12);
  CHECK(max_abs_diff(co.l_y, l_expected) < 1e-12);
}

TEST_CASE("coarsen identity assignment and edgeless graph") {
  Matrix a = path_adjacency(3);
  Coarsened id = coarsen(a, Matrix::identity(3));
  CHECK(max_abs_diff(id.a_y, a) == 0.0);

  Coarsened zero = coarsen(Matrix(4, 4), hard_assignment(Partition::contiguous(4, 2)));
  CHECK(max_abs(zero.a_y) == 0.0);
}

TEST_CASE("lemma 1 identity on path-4 and identity partition") {
  Partition p;
  p.clusters = {{0, 1}, {2, 3}};
  LemmaCheck check = verify_lemma1(path_adjacency(4), p, 1e-12);
  CHECK(check.pass);
  CHECK(check.max_deviation < 1e-12);

  LemmaCheck ident = verify_lemma1(path_adjacency(4), Partition::contiguous(4, 1), 1e-12);
  CHECK(ident.max_deviation == 0.0);
}

TEST_CASE("lemma 1 identity on 50 random equi-partitioned graphs") {
  int count = 0;
  for (std::uint64_t seed = 0; count < 50; ++seed) {
    Rng rng(Rng::derive(7, seed));
    const int m = 1 + rng.below(4);
    const int clusters = 2 + rng.below(15);
    const int n = m * clusters;
    if (n < 4 || n > 64) continue;
    Matrix a = random_connected_graph(n, rng);
    Partition p = random_equi_partition(n, m, rng);
    LemmaCheck check = verify_lemma1(a, p, 1e-9);
    CHECK(check.pass);
    ++count;
  }
}

TEST_CASE("energy report reproduces the documented path-4 counterexample") {
  Partition p;
  p.clusters = {{0, 1}, {2, 3}};
  Matrix z{{4}, {3}, {1}, {0}};
  EnergyTrial t = energy_pair(path_adjacency(4), p, z);
  CHECK(t.e_x == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(t.e_y == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(t.ratio == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("piecewise-constant signals preserve energy exactly") {
  Partition p;
  p.clusters = {{0, 1}, {2, 3}};
  Matrix z{{2.5}, {2.5}, {-1.0}, {-1.0}};
  EnergyTrial t = energy_pair(path_adjacency(4), p, z);
  const double expected = (2.5 - (-1.0)) * (2.5 - (-1.0));
  CHECK(t.e_x == doctest::Approx(expected).epsilon(1e-12));
  CHECK(t.e_y == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("constant signal has zero energy on both graphs") {
  Partition p = Partition::contiguous(6, 2);
  Rng rng(2);
  Matrix a = random_connected_graph(6, rng);
  EnergyTrial t = energy_pair(a, p, Matrix(6, 1, 3.7));
  CHECK(std::abs(t.e_x) < 1e-9);
  CHECK(std::abs(t.e_y) < 1e-9);
}

TEST_CASE("energy_report records structure checks and counterexamples") {
  EnergyReport report = energy_report(path_adjacency(4), Partition::contiguous(4, 2), 50, 7);
  CHECK(report.trials == 50);
  CHECK(report.per_trial.size() == 50);
  CHECK(report.piecewise_constant_exact);
  CHECK(report.top_eigvec_contracts);
  CHECK(report.constant_zero);
  CHECK(report.ratio_min <= report.ratio_median);
  CHECK(report.ratio_median <= report.ratio_max);
  for (const auto& c : report.counterexamples) CHECK(c.ratio > 1.0);

  const std::string json = energy_report_to_json(report);
  CHECK(json.find("piecewise_constant_exact") != std::string::npos);
  CHECK(json.find("counterexamples") != std::string::npos);
}

TEST_CASE("edge frequency classification covers every edge") {
  Rng rng(4);
  Matrix a = random_connected_graph(10, rng);
  Matrix x(10, 1);
  for (int i = 0; i < 10; ++i) x(i, 0) = rng.uniform(0.0, 10.0);
  auto edges = classify_edge_frequency(a, x, 2);
  int expected = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      if (a(i, j) != 0.0) ++expected;
  CHECK(static_cast<int>(edges.size()) == expected);
}
