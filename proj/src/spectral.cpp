// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#include "hifinet/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "hifinet/rng.hpp"
#include "json.hpp"

namespace hifinet::spectral {

int Partition::n_nodes() const {
  int n = 0;
  for (const auto& c : clusters) n += static_cast<int>(c.size());
  return n;
}

bool Partition::is_valid(int n) const {
  std::vector<int> hits(static_cast<std::size_t>(n), 0);
  for (const auto& c : clusters) {
    for (int i : c) {
      if (i < 0 || i >= n) return false;
      ++hits[static_cast<std::size_t>(i)];
    }
  }
  return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

bool Partition::is_equi_partition() const {
  if (clusters.empty()) return false;
  const std::size_t m = clusters.front().size();
  return m > 0 && std::all_of(clusters.begin(), clusters.end(),
                              [m](const auto& c) { return c.size() == m; });
}

Partition Partition::contiguous(int n, int m) {
  if (m < 1 || n % m != 0) {
    throw ContractError("Partition::contiguous: cluster size " + std::to_string(m) +
                        " does not divide " + std::to_string(n));
  }
  Partition p;
  for (int start = 0; start < n; start += m) {
    std::vector<int> c(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) c[static_cast<std::size_t>(i)] = start + i;
    p.clusters.push_back(std::move(c));
  }
  return p;
}

Matrix laplacian(const Matrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw ShapeError("laplacian: adjacency must be square, got " + adjacency.shape_str());
  }
  const int n = adjacency.rows();
  Matrix sym(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sym(i, j) = std::max(adjacency(i, j), adjacency(j, i));
  Matrix l(n, n);
  for (int i = 0; i < n; ++i) {
    double deg = 0.0;
    for (int j = 0; j < n; ++j) deg += sym(i, j);
    for (int j = 0; j < n; ++j) l(i, j) = -sym(i, j);
    l(i, i) += deg;
  }
  return l;
}

SpectralBasis eigendecompose(const Matrix& l) {
  if (l.rows() != l.cols()) {
    throw ContractError("eigendecompose: matrix must be square, got " + l.shape_str());
  }
  const int n = l.rows();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(l(i, j) - l(j, i)) > 1e-10) {
        throw ContractError("eigendecompose: input not symmetric at (" + std::to_string(i) +
                            "," + std::to_string(j) + "), delta " +
                            std::to_string(l(i, j) - l(j, i)));
      }
    }
  }

  Matrix a = l;
  Matrix v = Matrix::identity(n);
  const double scale = std::max(1.0, max_abs(a));
  const int max_sweeps = 64;
  bool converged = (n <= 1);
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-14 * scale * n) {
      converged = true;
      break;
    }
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // Rotate rows/cols p and q of a.
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    // Final tolerance check; Jacobi converges quadratically so this is rare.
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) > 1e-10 * scale * n) {
      throw NumericError("eigendecompose: Jacobi did not converge in " +
                         std::to_string(max_sweeps) + " sweeps, off-norm " +
                         std::to_string(std::sqrt(off)));
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&a](int x, int y) { return a(x, x) < a(y, y); });

  SpectralBasis basis;
  basis.eigenvalues.resize(static_cast<std::size_t>(n));
  basis.eigenvectors = Matrix(n, n);
  for (int j = 0; j < n; ++j) {
    const int src = order[static_cast<std::size_t>(j)];
    basis.eigenvalues[static_cast<std::size_t>(j)] = a(src, src);
    // Sign convention: make the largest-magnitude component positive,
    // ties resolved in favor of the lowest index.
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      const double mag = std::abs(v(i, src));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i) basis.eigenvectors(i, j) = sign * v(i, src);
  }
  return basis;
}

Matrix gft(const SpectralBasis& basis, const Matrix& x) {
  if (x.rows() != basis.n() || x.cols() != 1) {
    throw ShapeError("gft: signal must be " + std::to_string(basis.n()) + "x1, got " +
                     x.shape_str());
  }
  return matmul(transpose(basis.eigenvectors), x);
}

Matrix igft(const SpectralBasis& basis, const Matrix& x_hat) {
  if (x_hat.rows() != basis.n() || x_hat.cols() != 1) {
    throw ShapeError("igft: coefficients must be " + std::to_string(basis.n()) +
                     "x1, got " + x_hat.shape_str());
  }
  return matmul(basis.eigenvectors, x_hat);
}

double dirichlet_energy(const Matrix& l, const Matrix& x) {
  if (l.rows() != l.cols() || x.rows() != l.rows() || x.cols() != 1) {
    throw ShapeError("dirichlet_energy: L " + l.shape_str() + " vs x " + x.shape_str());
  }
  const Matrix lx = matmul(l, x);
  double e = 0.0;
  for (int i = 0; i < x.rows(); ++i) e += x(i, 0) * lx(i, 0);
  return e;
}

FrequencySplit frequency_split(const SpectralBasis& basis, const Matrix& x, int k) {
  const int n = basis.n();
  if (k < 0 || k > n) {
    throw ContractError("frequency_split: k " + std::to_string(k) + " out of [0, " +
                        std::to_string(n) + "]");
  }
  if (x.rows() != n || x.cols() != 1) {
    throw ShapeError("frequency_split: signal must be " + std::to_string(n) + "x1, got " +
                     x.shape_str());
  }
  Matrix low(n, 1);
  for (int j = 0; j < k; ++j) {
    double coef = 0.0;
    for (int i = 0; i < n; ++i) coef += basis.eigenvectors(i, j) * x(i, 0);
    for (int i = 0; i < n; ++i) low(i, 0) += coef * basis.eigenvectors(i, j);
  }
  return FrequencySplit{low, sub(x, low)};
}

Matrix hard_assignment(const Partition& p) {
  const int n = p.n_nodes();
  if (!p.is_valid(n)) {
    throw ContractError("hard_assignment: clusters are not a disjoint cover");
  }
  if (!p.is_equi_partition()) {
    throw ContractError("hard_assignment: requires an equi-partition (equal cluster sizes)");
  }
  const int m = static_cast<int>(p.clusters.front().size());
  const double w = 1.0 / std::sqrt(static_cast<double>(m));
  Matrix a(p.n_clusters(), n);
  for (int c = 0; c < p.n_clusters(); ++c) {
    for (int i : p.clusters[static_cast<std::size_t>(c)]) a(c, i) = w;
  }
  return a;
}

Coarsened coarsen(const Matrix& a_x, const Matrix& a_xy) {
  if (a_x.rows() != a_x.cols() || a_xy.cols() != a_x.rows()) {
    throw ShapeError("coarsen: A_X " + a_x.shape_str() + " vs A_XY " + a_xy.shape_str());
  }
  Matrix a_y = matmul(matmul(a_xy, a_x), transpose(a_xy));
  const int ny = a_y.rows();
  Matrix l_y(ny, ny);
  for (int i = 0; i < ny; ++i) {
    double deg = 0.0;
    for (int j = 0; j < ny; ++j) deg += a_y(i, j);
    for (int j = 0; j < ny; ++j) l_y(i, j) = -a_y(i, j);
    l_y(i, i) += deg;
  }
  return Coarsened{std::move(a_y), std::move(l_y)};
}

LemmaCheck verify_lemma1(const Matrix& a_x, const Partition& p, double tol) {
  const Matrix a_xy = hard_assignment(p);
  const Coarsened co = coarsen(a_x, a_xy);
  const Matrix rhs = matmul(matmul(a_xy, laplacian(a_x)), transpose(a_xy));
  const double dev = max_abs_diff(co.l_y, rhs);
  return LemmaCheck{dev < tol, dev};
}

EnergyTrial energy_pair(const Matrix& a_x, const Partition& p, const Matrix& z) {
  const Matrix a_xy = hard_assignment(p);
  const Matrix l_x = laplacian(a_x);
  const Coarsened co = coarsen(a_x, a_xy);
  const Matrix z_y = matmul(a_xy, z);
  EnergyTrial t;
  t.e_x = dirichlet_energy(l_x, z);
  t.e_y = dirichlet_energy(co.l_y, z_y);
  t.ratio = t.e_x > 1e-12 ? t.e_y / t.e_x : 1.0;
  return t;
}

EnergyReport energy_report(const Matrix& a_x, const Partition& p, int trials,
                           std::uint64_t seed) {
  if (trials < 1) throw ContractError("energy_report: trials must be >= 1");
  const int n = a_x.rows();
  const Matrix a_xy = hard_assignment(p);
  const Matrix l_x = laplacian(a_x);
  const Coarsened co = coarsen(a_x, a_xy);

  auto energies = [&](const Matrix& z) {
    EnergyTrial t;
    t.e_x = dirichlet_energy(l_x, z);
    t.e_y = dirichlet_energy(co.l_y, matmul(a_xy, z));
    t.ratio = t.e_x > 1e-12 ? t.e_y / t.e_x : 1.0;
    return t;
  };

  EnergyReport report;
  report.trials = trials;
  std::vector<double> ratios;
  for (int t = 0; t < trials; ++t) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(t)));
    Matrix z(n, 1);
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
      z(i, 0) = rng.normal();
      norm += z(i, 0) * z(i, 0);
    }
    norm = std::sqrt(norm);
    for (int i = 0; i < n; ++i) z(i, 0) /= std::max(norm, 1e-300);
    EnergyTrial trial = energies(z);
    report.per_trial.push_back(trial);
    ratios.push_back(trial.ratio);
    if (trial.ratio > 1.0 + 1e-9) {
      report.counterexamples.push_back({t, trial.ratio});
    }
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  report.ratio_min = sorted.front();
  report.ratio_max = sorted.back();
  report.ratio_median = sorted[sorted.size() / 2];
  double mean = 0.0;
  for (double r : ratios) mean += r;
  report.ratio_mean = mean / static_cast<double>(ratios.size());

  // (a) Cluster-piecewise-constant signals preserve energy exactly.
  {
    Rng rng(Rng::derive(seed, 0x70c0ULL));
    Matrix z(n, 1);
    for (std::size_t c = 0; c < p.clusters.size(); ++c) {
      const double val = rng.uniform(-2.0, 2.0);
      for (int i : p.clusters[c]) z(i, 0) = val;
    }
    EnergyTrial t = energies(z);
    report.piecewise_constant_exact = std::abs(t.e_x - t.e_y) < 1e-9;
  }
  // (b) Top-eigenvector signal contracts.
  {
    const SpectralBasis basis = eigendecompose(l_x);
    Matrix z(n, 1);
    for (int i = 0; i < n; ++i) z(i, 0) = basis.eigenvectors(i, n - 1);
    EnergyTrial t = energies(z);
    report.top_eigvec_contracts = t.e_y <= t.e_x + 1e-9;
  }
  // (c) Constant signal sits in both kernels.
  {
    Matrix z(n, 1, 1.0);
    EnergyTrial t = energies(z);
    report.constant_zero = std::abs(t.e_x) < 1e-9 && std::abs(t.e_y) < 1e-9;
  }
  return report;
}

std::string energy_report_to_json(const EnergyReport& report) {
  nlohmann::json j;
  j["trials"] = report.trials;
  j["ratios"] = {{"min", report.ratio_min},
                 {"median", report.ratio_median},
                 {"mean", report.ratio_mean},
                 {"max", report.ratio_max}};
  j["piecewise_constant_exact"] = report.piecewise_constant_exact;
  j["top_eigvec_contracts"] = report.top_eigvec_contracts;
  j["counterexamples"] = nlohmann::json::array();
  for (const auto& c : report.counterexamples) {
    j["counterexamples"].push_back({{"trial", c.trial}, {"ratio", c.ratio}});
  }
  return j.dump(2);
}

std::vector<EdgeFrequency> classify_edge_frequency(const Matrix& adjacency,
                                                   const Matrix& signal, int k_low) {
  const int n = adjacency.rows();
  const SpectralBasis basis = eigendecompose(laplacian(adjacency));
  const FrequencySplit split = frequency_split(basis, signal, k_low);
  double low_mean = 0.0;
  for (int i = 0; i < n; ++i) low_mean += split.low(i, 0);
  low_mean /= std::max(1, n);

  std::vector<EdgeFrequency> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (adjacency(i, j) == 0.0) continue;
      const double high_score = std::abs(split.high(i, 0)) + std::abs(split.high(j, 0));
      const double low_score = std::abs(split.low(i, 0) - low_mean) +
                               std::abs(split.low(j, 0) - low_mean);
      edges.push_back({i, j, high_score > low_score});
    }
  }
  return edges;
}

}  // namespace hifinet::spectral
