// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0
//
// Tape gradients against the central finite-difference oracle, op by op.

#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "hifinet/grad_check.hpp"
#include "hifinet/matrix.hpp"
#include "hifinet/rng.hpp"
#include "hifinet/tape.hpp"

using namespace hifinet;

namespace {

Matrix random_matrix(Rng& rng, int r, int c, double lo = -2.0, double hi = 2.0) {
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

// Keeps activation inputs away from the kink at zero so the finite-difference
// step never crosses it.
Matrix random_matrix_away_from_zero(Rng& rng, int r, int c) {
  Matrix m(r, c);
  for (double& v : m.data()) {
    const double mag = rng.uniform(0.05, 2.0);
    v = rng.uniform() < 0.5 ? -mag : mag;
  }
  return m;
}

double run_check(ParamStore& store, const ForwardFn& f) {
  return grad_check(store, f, 1e-5).max_rel_err;
}

// Weighted sum so each output entry receives a distinct upstream gradient.
Var weighted_sum(Tape& t, Var x, Rng& rng) {
  const Matrix& xv = t.value(x);
  Matrix w = random_matrix(rng, xv.rows(), xv.cols(), 0.2, 1.0);
  return t.sum_all(t.hadamard(x, t.constant(w)));
}

}  // namespace

TEST_CASE("backward of sum fills ones") {
  Tape t;
  Var x = t.leaf(Matrix{{1, 2}, {3, 4}});
  Var loss = t.sum_all(x);
  t.backward(loss);
  for (double g : t.grad(x).data()) CHECK(g == 1.0);
}

TEST_CASE("backward of squared norm gives 2x") {
  Tape t;
  Matrix xv{{1, -2}, {0.5, 3}};
  Var x = t.leaf(xv);
  Var loss = t.sum_all(t.hadamard(x, x));
  t.backward(loss);
  CHECK(max_abs_diff(t.grad(x), scale(xv, 2.0)) < 1e-12);
}

TEST_CASE("backward rejects non-scalar loss") {
  Tape t;
  Var x = t.leaf(Matrix(2, 2, 1.0));
  CHECK_THROWS_AS(t.backward(x), ContractError);
}

TEST_CASE("gradients accumulate across fan-out") {
  Tape t;
  Var x = t.leaf(Matrix(1, 3, 1.5));
  Var y = t.add(x, x);
  t.backward(t.sum_all(y));
  for (double g : t.grad(x).data()) CHECK(g == 2.0);
}

TEST_CASE("grad_check on quadratic is tight") {
  ParamStore store;
  store.add("x", Matrix{{1, 2}});
  auto report = grad_check(
      store,
      [](Tape& t, const std::map<std::string, Var>& p) {
        Var x = p.at("x");
        return t.sum_all(t.hadamard(x, x));
      },
      1e-5);
  CHECK(report.max_rel_err < 1e-8);
}

TEST_CASE("grad_check on constant function is zero") {
  ParamStore store;
  store.add("x", Matrix{{0.3, -0.7}});
  auto report = grad_check(
      store,
      [](Tape& t, const std::map<std::string, Var>&) { return t.scalar(4.2); }, 1e-5);
  CHECK(report.max_rel_err == 0.0);
}

TEST_CASE("per-op gradients match finite differences over 100+ seeds") {
  struct OpCase {
    const char* name;
    std::function<double(std::uint64_t)> run;  // returns max relative error
  };

  auto simple_unary = [](auto op, bool away_from_zero = false, double lo = -2.0,
                         double hi = 2.0) {
    return [op, away_from_zero, lo, hi](std::uint64_t seed) {
      Rng rng(seed);
      const int r = 1 + rng.below(4), c = 1 + rng.below(4);
      ParamStore store;
      store.add("x", away_from_zero ? random_matrix_away_from_zero(rng, r, c)
                                    : random_matrix(rng, r, c, lo, hi));
      return run_check(store, [&](Tape& t, const std::map<std::string, Var>& p) {
        Rng wr(seed ^ 0xabcdULL);
        return weighted_sum(t, op(t, p.at("x")), wr);
      });
    };
  };

  std::vector<OpCase> cases;
  cases.push_back({"matmul", [](std::uint64_t seed) {
    Rng rng(seed);
    const int m = 1 + rng.below(4), k = 1 + rng.below(4), n = 1 + rng.below(4);
    ParamStore store;
    store.add("a", random_matrix(rng, m, k));
    store.add("b", random_matrix(rng, k, n));
    return run_check(store, [&](Tape& t, const std::map<std::string, Var>& p) {
      Rng wr(seed ^ 0xabcdULL);
      return weighted_sum(t, t.matmul(p.at("a"), p.at("b")), wr);
    });
  }});
  cases.push_back({"add_sub_hadamard", [](std::uint64_t seed) {
    Rng rng(seed);
    const int r = 1 + rng.below(4), c = 1 + rng.below(4);
    ParamStore store;
    store.add("a", random_matrix(rng, r, c));
    store.add("b", random_matrix(rng, r, c));
    return run_check(store, [&](Tape& t, const std::map<std::string, Var>& p) {
      Var mixed = t.hadamard(t.add(p.at("a"), p.at("b")), t.sub(p.at("a"), p.at("b")));
      Rng wr(seed ^ 0xabcdULL);
      return weighted_sum(t, mixed, wr);
    });
  }});
  cases.push_back({"transpose", simple_unary([](Tape& t, Var x) { return t.transpose(x); })});
  cases.push_back({"affine", simple_unary([](Tape& t, Var x) { return t.affine(x, -1.3, 0.4); })});
  cases.push_back({"softmax_rows", simple_unary([](Tape& t, Var x) { return t.softmax_rows(x); })});
  cases.push_back({"relu", simple_unary([](Tape& t, Var x) { return t.relu(x); }, true)});
  cases.push_back({"leaky_relu",
                   simple_unary([](Tape& t, Var x) { return t.leaky_relu(x, 0.2); }, true)});
  cases.push_back({"elu", simple_unary([](Tape& t, Var x) { return t.elu(x); }, true)});
  cases.push_back({"sigmoid", simple_unary([](Tape& t, Var x) { return t.sigmoid(x); })});
  cases.push_back({"row_l2_normalize",
                   simple_unary([](Tape& t, Var x) { return t.row_l2_normalize(x); }, true)});
  cases.push_back({"xlogx",
                   simple_unary([](Tape& t, Var x) { return t.xlogx(x); }, false, 0.05, 2.0)});
  cases.push_back({"masked_softmax", [](std::uint64_t seed) {
    Rng rng(seed);
    const int n = 2 + rng.below(4);
    ParamStore store;
    store.add("x", random_matrix(rng, n, n));
    Matrix mask(n, n);
    for (int i = 0; i < n; ++i) {
      mask(i, i) = 1.0;  // keep every row non-empty
      for (int j = 0; j < n; ++j)
        if (rng.uniform() < 0.5) mask(i, j) = 1.0;
    }
    return run_check(store, [&, mask](Tape& t, const std::map<std::string, Var>& p) {
      Rng wr(seed ^ 0xabcdULL);
      return weighted_sum(t, t.masked_softmax_rows(p.at("x"), mask), wr);
    });
  }});
  cases.push_back({"layer_norm", [](std::uint64_t seed) {
    Rng rng(seed);
    const int r = 1 + rng.below(4), d = 2 + rng.below(4);
    ParamStore store;
    store.add("x", random_matrix(rng, r, d));
    store.add("gain", random_matrix(rng, 1, d, 0.5, 1.5));
    store.add("bias", random_matrix(rng, 1, d, -0.5, 0.5));
    return run_check(store, [&](Tape& t, const std::map<std::string, Var>& p) {
      Rng wr(seed ^ 0xabcdULL);
      return weighted_sum(t, t.layer_norm(p.at("x"), p.at("gain"), p.at("bias"), 1e-5), wr);
    });
  }});
  cases.push_back({"add_row_broadcast_concat_slice", [](std::uint64_t seed) {
    Rng rng(seed);
    const int r = 1 + rng.below(4), c = 1 + rng.below(3);
    ParamStore store;
    store.add("x", random_matrix(rng, r, c));
    store.add("y", random_matrix(rng, r, c + 1));
    store.add("bias", random_matrix(rng, 1, c));
    return run_check(store, [&](Tape& t, const std::map<std::string, Var>& p) {
      Var xb = t.add_row_broadcast(p.at("x"), p.at("bias"));
      Var cat = t.concat_cols({xb, p.at("y")});
      Var sl = t.slice_cols(cat, 1, c);
      Rng wr(seed ^ 0xabcdULL);
      return weighted_sum(t, sl, wr);
    });
  }});
  cases.push_back({"gather_rows", [](std::uint64_t seed) {
    Rng rng(seed);
    const int rows = 3 + rng.below(4), c = 1 + rng.below(4), picks = 1 + rng.below(6);
    ParamStore store;
    store.add("table", random_matrix(rng, rows, c));
    std::vector<int> idx;
    for (int i = 0; i < picks; ++i) idx.push_back(rng.below(rows));
    return run_check(store, [&, idx](Tape& t, const std::map<std::string, Var>& p) {
      Rng wr(seed ^ 0xabcdULL);
      return weighted_sum(t, t.gather_rows(p.at("table"), idx), wr);
    });
  }});
  cases.push_back({"outer_sum_scale_by", [](std::uint64_t seed) {
    Rng rng(seed);
    const int n = 1 + rng.below(4);
    ParamStore store;
    store.add("s", random_matrix(rng, n, 1));
    store.add("t", random_matrix(rng, n, 1));
    store.add("alpha", random_matrix(rng, 1, 1, 0.2, 0.8));
    return run_check(store, [&](Tape& t, const std::map<std::string, Var>& p) {
      Var e = t.outer_sum(p.at("s"), p.at("t"));
      Var scaled = t.scale_by(e, p.at("alpha"));
      Rng wr(seed ^ 0xabcdULL);
      return weighted_sum(t, scaled, wr);
    });
  }});
  cases.push_back({"cross_entropy_rows", [](std::uint64_t seed) {
    Rng rng(seed);
    const int r = 1 + rng.below(4), c = 2 + rng.below(4);
    ParamStore store;
    store.add("logits", random_matrix(rng, r, c));
    std::vector<int> targets;
    for (int i = 0; i < r; ++i) targets.push_back(rng.below(c));
    return run_check(store, [&, targets](Tape& t, const std::map<std::string, Var>& p) {
      return t.cross_entropy_rows(p.at("logits"), targets);
    });
  }});
  cases.push_back({"composite_chain", [](std::uint64_t seed) {
    Rng rng(seed);
    const int n = 2 + rng.below(3), d = 2 + rng.below(3);
    ParamStore store;
    store.add("h", random_matrix(rng, n, d));
    store.add("w", random_matrix(rng, d, d));
    store.add("gain", random_matrix(rng, 1, d, 0.5, 1.5));
    store.add("bias", random_matrix(rng, 1, d, -0.3, 0.3));
    return run_check(store, [&](Tape& t, const std::map<std::string, Var>& p) {
      Var hw = t.matmul(p.at("h"), p.at("w"));
      Var att = t.softmax_rows(t.scale(t.matmul(hw, t.transpose(hw)), 1.0 / std::sqrt(d)));
      Var mixed = t.matmul(att, hw);
      Var normed = t.layer_norm(t.add(mixed, p.at("h")), p.at("gain"), p.at("bias"), 1e-5);
      Rng wr(seed ^ 0xabcdULL);
      return weighted_sum(t, normed, wr);
    });
  }});

  int seeds_run = 0;
  for (const auto& c : cases) {
    for (std::uint64_t s = 1; s <= 7; ++s) {
      const double err = c.run(Rng::derive(1234, s * 1000 + seeds_run));
      INFO("op ", c.name, " seed ", s);
      CHECK(err < 1e-6);
      ++seeds_run;
    }
  }
  CHECK(seeds_run >= 100);
}
