// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode differentiation over dense matrices. A Tape is a Wengert list:
// nodes are appended in forward (topological) order and the backward sweep
// walks them in reverse, accumulating gradients additively across fan-out.
//
// A tape is owned by exactly one training context at a time. Matrices handed
// in as constants are never written to.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hifinet/matrix.hpp"

namespace hifinet {

/// Handle to a node on a Tape. Valid only for the tape that produced it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Non-trainable input; gradients are not tracked through it.
  Var constant(Matrix value);
  /// Trainable leaf; receives gradients on backward().
  Var leaf(Matrix value);
  /// 1x1 constant convenience.
  Var scalar(double v) { return constant(Matrix(1, 1, std::vector<double>{v})); }

  const Matrix& value(Var v) const { return node(v).value; }
  const Matrix& grad(Var v) const { return node(v).grad; }
  bool needs_grad(Var v) const { return node(v).needs_grad; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // --- differentiable operations -------------------------------------
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var hadamard(Var a, Var b);
  /// c * x  (c is a plain constant).
  Var scale(Var x, double c);
  /// a * x + b elementwise (plain constants).
  Var affine(Var x, double a, double b);
  Var matmul(Var a, Var b);
  Var transpose(Var x);
  Var softmax_rows(Var x);
  /// Row softmax restricted to entries where mask != 0; masked-out entries
  /// are exactly 0 in the output. Every row of mask must have a nonzero.
  Var masked_softmax_rows(Var x, const Matrix& mask);
  Var relu(Var x);
  Var leaky_relu(Var x, double slope);
  Var elu(Var x);
  Var sigmoid(Var x);
  Var layer_norm(Var x, Var gain, Var bias, double eps);
  /// x (n x d) + bias (1 x d) broadcast over rows.
  Var add_row_broadcast(Var x, Var bias);
  Var concat_cols(const std::vector<Var>& parts);
  /// out[:, 0:len] = x[:, start:start+len].
  Var slice_cols(Var x, int start, int len);
  /// Row gather: out row i = table row indices[i]. Backward scatter-adds.
  Var gather_rows(Var table, const std::vector<int>& indices);
  /// out[i][j] = s[i][0] + t[j][0]; s, t are n x 1.
  Var outer_sum(Var s, Var t);
  /// s * x where s is a 1x1 node (both sides differentiable).
  Var scale_by(Var x, Var s);
  Var sum_all(Var x);
  Var row_l2_normalize(Var x, double eps = 1e-12);
  /// Elementwise x*log(x) with 0 log 0 := 0; gradients clamped near 0.
  Var xlogx(Var x);
  /// Mean over rows of (logsumexp(row) - row[target]); the InfoNCE /
  /// cross-entropy kernel. Numerically stable.
  Var cross_entropy_rows(Var logits, const std::vector<int>& targets);

  /// Reverse sweep from a 1x1 loss node. Gradients accumulate into every
  /// node with needs_grad; leaves keep theirs until the tape is destroyed.
  void backward(Var loss);

 private:
  struct Node {
    Matrix value;
    Matrix grad;  // same shape, zero-initialized
    bool needs_grad = false;
    std::function<void(Tape&, int self)> backprop;  // empty for leaves/constants
  };

  Var push(Matrix value, bool needs_grad, std::function<void(Tape&, int)> backprop);
  const Node& node(Var v) const;
  Node& node(Var v);
  void check_owned(Var v, const char* op) const;

  std::vector<Node> nodes_;
};

/// Ordered (lexicographic by name) store of trainable parameters. The store
/// owns the master values; each forward pass binds them onto a fresh tape.
class ParamStore {
 public:
  void add(const std::string& name, Matrix value);
  bool contains(const std::string& name) const;
  Matrix& value(const std::string& name);
  const Matrix& value(const std::string& name) const;
  std::size_t count() const { return params_.size(); }
  std::map<std::string, Matrix>& all() { return params_; }
  const std::map<std::string, Matrix>& all() const { return params_; }

 private:
  std::map<std::string, Matrix> params_;
};

/// Leaf every parameter onto the tape, in lexicographic name order.
std::map<std::string, Var> bind_params(Tape& tape, const ParamStore& store);

}  // namespace hifinet
