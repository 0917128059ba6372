// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#include "hifinet/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hifinet {

namespace {
constexpr double kXLogXFloor = 1e-12;
}

Var Tape::push(Matrix value, bool needs_grad, std::function<void(Tape&, int)> backprop) {
  Node n;
  n.grad = Matrix(value.rows(), value.cols());
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(Var v) const {
  check_owned(v, "node access");
  return nodes_[static_cast<std::size_t>(v.id)];
}

Tape::Node& Tape::node(Var v) {
  check_owned(v, "node access");
  return nodes_[static_cast<std::size_t>(v.id)];
}

void Tape::check_owned(Var v, const char* op) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw ContractError(std::string(op) + ": var id " + std::to_string(v.id) +
                        " is not on this tape");
  }
}

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::leaf(Matrix value) { return push(std::move(value), true, nullptr); }

Var Tape::add(Var a, Var b) {
  Matrix out = hifinet::add(value(a), value(b));
  return push(std::move(out), needs_grad(a) || needs_grad(b),
              [ia = a.id, ib = b.id](Tape& t, int self) {
                const Matrix& g = t.nodes_[self].grad;
                if (t.nodes_[ia].needs_grad) add_in_place(t.nodes_[ia].grad, g);
                if (t.nodes_[ib].needs_grad) add_in_place(t.nodes_[ib].grad, g);
              });
}

Var Tape::sub(Var a, Var b) {
  Matrix out = hifinet::sub(value(a), value(b));
  return push(std::move(out), needs_grad(a) || needs_grad(b),
              [ia = a.id, ib = b.id](Tape& t, int self) {
                const Matrix& g = t.nodes_[self].grad;
                if (t.nodes_[ia].needs_grad) add_in_place(t.nodes_[ia].grad, g);
                if (t.nodes_[ib].needs_grad) add_in_place(t.nodes_[ib].grad, hifinet::scale(g, -1.0));
              });
}

Var Tape::hadamard(Var a, Var b) {
  Matrix out = hifinet::hadamard(value(a), value(b));
  return push(std::move(out), needs_grad(a) || needs_grad(b),
              [ia = a.id, ib = b.id](Tape& t, int self) {
                const Matrix& g = t.nodes_[self].grad;
                if (t.nodes_[ia].needs_grad)
                  add_in_place(t.nodes_[ia].grad, hifinet::hadamard(g, t.nodes_[ib].value));
                if (t.nodes_[ib].needs_grad)
                  add_in_place(t.nodes_[ib].grad, hifinet::hadamard(g, t.nodes_[ia].value));
              });
}

Var Tape::scale(Var x, double c) { return affine(x, c, 0.0); }

Var Tape::affine(Var x, double a, double b) {
  Matrix out = value(x);
  for (double& v : out.data()) v = a * v + b;
  return push(std::move(out), needs_grad(x), [ix = x.id, a](Tape& t, int self) {
    if (!t.nodes_[ix].needs_grad) return;
    add_in_place(t.nodes_[ix].grad, hifinet::scale(t.nodes_[self].grad, a));
  });
}

Var Tape::matmul(Var a, Var b) {
  Matrix out = hifinet::matmul(value(a), value(b));
  return push(std::move(out), needs_grad(a) || needs_grad(b),
              [ia = a.id, ib = b.id](Tape& t, int self) {
                const Matrix& g = t.nodes_[self].grad;
                if (t.nodes_[ia].needs_grad)
                  add_in_place(t.nodes_[ia].grad,
                               hifinet::matmul(g, hifinet::transpose(t.nodes_[ib].value)));
                if (t.nodes_[ib].needs_grad)
                  add_in_place(t.nodes_[ib].grad,
                               hifinet::matmul(hifinet::transpose(t.nodes_[ia].value), g));
              });
}

Var Tape::transpose(Var x) {
  Matrix out = hifinet::transpose(value(x));
  return push(std::move(out), needs_grad(x), [ix = x.id](Tape& t, int self) {
    if (!t.nodes_[ix].needs_grad) return;
    add_in_place(t.nodes_[ix].grad, hifinet::transpose(t.nodes_[self].grad));
  });
}

Var Tape::softmax_rows(Var x) {
  Matrix out = hifinet::softmax_rows(value(x));
  return push(std::move(out), needs_grad(x), [ix = x.id](Tape& t, int self) {
    if (!t.nodes_[ix].needs_grad) return;
    const Matrix& p = t.nodes_[self].value;
    const Matrix& g = t.nodes_[self].grad;
    Matrix dx(p.rows(), p.cols());
    for (int i = 0; i < p.rows(); ++i) {
      double dot = 0.0;
      for (int j = 0; j < p.cols(); ++j) dot += p(i, j) * g(i, j);
      for (int j = 0; j < p.cols(); ++j) dx(i, j) = p(i, j) * (g(i, j) - dot);
    }
    add_in_place(t.nodes_[ix].grad, dx);
  });
}

Var Tape::masked_softmax_rows(Var x, const Matrix& mask) {
  const Matrix& m = value(x);
  if (!m.same_shape(mask)) {
    throw ShapeError("masked_softmax_rows: input " + m.shape_str() + " vs mask " +
                     mask.shape_str());
  }
  Matrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) {
    double rowmax = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int j = 0; j < m.cols(); ++j) {
      if (mask(i, j) != 0.0) {
        rowmax = std::max(rowmax, m(i, j));
        any = true;
      }
    }
    if (!any) {
      throw ContractError("masked_softmax_rows: row " + std::to_string(i) +
                          " has an empty mask");
    }
    double sum = 0.0;
    for (int j = 0; j < m.cols(); ++j) {
      if (mask(i, j) != 0.0) {
        out(i, j) = std::exp(m(i, j) - rowmax);
        sum += out(i, j);
      }
    }
    for (int j = 0; j < m.cols(); ++j) out(i, j) /= sum;
  }
  // Same Jacobian as softmax; p is zero off-mask so those entries get zero grad.
  return push(std::move(out), needs_grad(x), [ix = x.id](Tape& t, int self) {
    if (!t.nodes_[ix].needs_grad) return;
    const Matrix& p = t.nodes_[self].value;
    const Matrix& g = t.nodes_[self].grad;
    Matrix dx(p.rows(), p.cols());
    for (int i = 0; i < p.rows(); ++i) {
      double dot = 0.0;
      for (int j = 0; j < p.cols(); ++j) dot += p(i, j) * g(i, j);
      for (int j = 0; j < p.cols(); ++j) dx(i, j) = p(i, j) * (g(i, j) - dot);
    }
    add_in_place(t.nodes_[ix].grad, dx);
  });
}

Var Tape::relu(Var x) {
  Matrix out = value(x);
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return push(std::move(out), needs_grad(x), [ix = x.id](Tape& t, int self) {
    if (!t.nodes_[ix].needs_grad) return;
    const Matrix& xv = t.nodes_[ix].value;
    const Matrix& g = t.nodes_[self].grad;
    Matrix dx(xv.rows(), xv.cols());
    for (int i = 0; i < xv.size(); ++i)
      dx.data()[i] = xv.data()[i] > 0.0 ? g.data()[i] : 0.0;
    add_in_place(t.nodes_[ix].grad, dx);
  });
}

Var Tape::leaky_relu(Var x, double slope) {
  Matrix out = value(x);
  for (double& v : out.data()) v = v > 0.0 ? v : slope * v;
  return push(std::move(out), needs_grad(x), [ix = x.id, slope](Tape& t, int self) {
    if (!t.nodes_[ix].needs_grad) return;
    const Matrix& xv = t.nodes_[ix].value;
    const Matrix& g = t.nodes_[self].grad;
    Matrix dx(xv.rows(), xv.cols());
    for (int i = 0; i < xv.size(); ++i)
      dx.data()[i] = xv.data()[i] > 0.0 ? g.data()[i] : slope * g.data()[i];
    add_in_place(t.nodes_[ix].grad, dx);
  });
}

Var Tape::elu(Var x) {
  Matrix out = value(x);
  for (double& v : out.data()) v = v > 0.0 ? v : std::expm1(v);
  return push(std::move(out), needs_grad(x), [ix = x.id](Tape& t, int self) {
    if (!t.nodes_[ix].needs_grad) return;
    const Matrix& xv = t.nodes_[ix].value;
    const Matrix& yv = t.nodes_[self].value;
    const Matrix& g = t.nodes_[self].grad;
    Matrix dx(xv.rows(), xv.cols());
    for (int i = 0; i < xv.size(); ++i) {
      const double d = xv.data()[i] > 0.0 ? 1.0 : yv.data()[i] + 1.0;
      dx.data()[i] = d * g.data()[i];
    }
    add_in_place(t.nodes_[ix].grad, dx);
  });
}

Var Tape::sigmoid(Var x) {
  Matrix out = value(x);
  for (double& v : out.data()) v = 1.0 / (1.0 + std::exp(-v));
  return push(std::move(out), needs_grad(x), [ix = x.id](Tape& t, int self) {
    if (!t.nodes_[ix].needs_grad) return;
    const Matrix& yv = t.nodes_[self].value;
    const Matrix& g = t.nodes_[self].grad;
    Matrix dx(yv.rows(), yv.cols());
    for (int i = 0; i < yv.size(); ++i) {
      const double y = yv.data()[i];
      dx.data()[i] = y * (1.0 - y) * g.data()[i];
    }
    add_in_place(t.nodes_[ix].grad, dx);
  });
}

Var Tape::layer_norm(Var x, Var gain, Var bias, double eps) {
  Matrix out = hifinet::layer_norm(value(x), value(gain), value(bias), eps);
  return push(std::move(out), needs_grad(x) || needs_grad(gain) || needs_grad(bias),
              [ix = x.id, ig = gain.id, ib = bias.id, eps](Tape& t, int self) {
                const Matrix& xv = t.nodes_[ix].value;
                const Matrix& gv = t.nodes_[ig].value;
                const Matrix& g = t.nodes_[self].grad;
                const int d = xv.cols();
                Matrix dx(xv.rows(), d);
                Matrix dgain(1, d);
                Matrix dbias(1, d);
                for (int i = 0; i < xv.rows(); ++i) {
                  double mean = 0.0;
                  for (int j = 0; j < d; ++j) mean += xv(i, j);
                  mean /= d;
                  double var = 0.0;
                  for (int j = 0; j < d; ++j) {
                    const double c = xv(i, j) - mean;
                    var += c * c;
                  }
                  var /= d;
                  const double inv = 1.0 / std::sqrt(var + eps);
                  // ghat = g * gain (upstream through the affine part)
                  double mean_gh = 0.0, mean_ghx = 0.0;
                  for (int j = 0; j < d; ++j) {
                    const double xhat = (xv(i, j) - mean) * inv;
                    const double gh = g(i, j) * gv(0, j);
                    mean_gh += gh;
                    mean_ghx += gh * xhat;
                    dgain(0, j) += g(i, j) * xhat;
                    dbias(0, j) += g(i, j);
                  }
                  mean_gh /= d;
                  mean_ghx /= d;
                  for (int j = 0; j < d; ++j) {
                    const double xhat = (xv(i, j) - mean) * inv;
                    const double gh = g(i, j) * gv(0, j);
                    dx(i, j) = inv * (gh - mean_gh - xhat * mean_ghx);
                  }
                }
                if (t.nodes_[ix].needs_grad) add_in_place(t.nodes_[ix].grad, dx);
                if (t.nodes_[ig].needs_grad) add_in_place(t.nodes_[ig].grad, dgain);
                if (t.nodes_[ib].needs_grad) add_in_place(t.nodes_[ib].grad, dbias);
              });
}

Var Tape::add_row_broadcast(Var x, Var bias) {
  const Matrix& xv = value(x);
  const Matrix& bv = value(bias);
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw ShapeError("add_row_broadcast: x " + xv.shape_str() + " vs bias " + bv.shape_str());
  }
  Matrix out = xv;
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) out(i, j) += bv(0, j);
  return push(std::move(out), needs_grad(x) || needs_grad(bias),
              [ix = x.id, ib = bias.id](Tape& t, int self) {
                const Matrix& g = t.nodes_[self].grad;
                if (t.nodes_[ix].needs_grad) add_in_place(t.nodes_[ix].grad, g);
                if (t.nodes_[ib].needs_grad) {
                  Matrix db(1, g.cols());
                  for (int i = 0; i < g.rows(); ++i)
                    for (int j = 0; j < g.cols(); ++j) db(0, j) += g(i, j);
                  add_in_place(t.nodes_[ib].grad, db);
                }
              });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const int rows = value(parts[0]).rows();
  int total = 0;
  bool any_grad = false;
  for (Var p : parts) {
    if (value(p).rows() != rows) {
      throw ShapeError("concat_cols: row counts disagree, " +
                       value(parts[0]).shape_str() + " vs " + value(p).shape_str());
    }
    total += value(p).cols();
    any_grad = any_grad || needs_grad(p);
  }
  Matrix out(rows, total);
  int off = 0;
  std::vector<int> ids, offs, widths;
  for (Var p : parts) {
    const Matrix& pv = value(p);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < pv.cols(); ++j) out(i, off + j) = pv(i, j);
    ids.push_back(p.id);
    offs.push_back(off);
    widths.push_back(pv.cols());
    off += pv.cols();
  }
  return push(std::move(out), any_grad,
              [ids, offs, widths](Tape& t, int self) {
                const Matrix& g = t.nodes_[self].grad;
                for (std::size_t k = 0; k < ids.size(); ++k) {
                  if (!t.nodes_[ids[k]].needs_grad) continue;
                  Matrix dp(g.rows(), widths[k]);
                  for (int i = 0; i < g.rows(); ++i)
                    for (int j = 0; j < widths[k]; ++j) dp(i, j) = g(i, offs[k] + j);
                  add_in_place(t.nodes_[ids[k]].grad, dp);
                }
              });
}

Var Tape::slice_cols(Var x, int start, int len) {
  const Matrix& xv = value(x);
  if (start < 0 || len < 0 || start + len > xv.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(start) + ", " +
                     std::to_string(start + len) + ") out of " + xv.shape_str());
  }
  Matrix out(xv.rows(), len);
  for (int i = 0; i < xv.rows(); ++i)
    for (int j = 0; j < len; ++j) out(i, j) = xv(i, start + j);
  return push(std::move(out), needs_grad(x),
              [ix = x.id, start, len](Tape& t, int self) {
                if (!t.nodes_[ix].needs_grad) return;
                const Matrix& g = t.nodes_[self].grad;
                Matrix dx(t.nodes_[ix].value.rows(), t.nodes_[ix].value.cols());
                for (int i = 0; i < g.rows(); ++i)
                  for (int j = 0; j < len; ++j) dx(i, start + j) = g(i, j);
                add_in_place(t.nodes_[ix].grad, dx);
              });
}

Var Tape::gather_rows(Var table, const std::vector<int>& indices) {
  const Matrix& tv = value(table);
  Matrix out(static_cast<int>(indices.size()), tv.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int r = indices[i];
    if (r < 0 || r >= tv.rows()) {
      throw ContractError("gather_rows: index " + std::to_string(r) + " out of " +
                          tv.shape_str());
    }
    for (int j = 0; j < tv.cols(); ++j) out(static_cast<int>(i), j) = tv(r, j);
  }
  return push(std::move(out), needs_grad(table),
              [it = table.id, indices](Tape& t, int self) {
                if (!t.nodes_[it].needs_grad) return;
                const Matrix& g = t.nodes_[self].grad;
                Matrix& dt = t.nodes_[it].grad;
                for (std::size_t i = 0; i < indices.size(); ++i)
                  for (int j = 0; j < g.cols(); ++j)
                    dt(indices[i], j) += g(static_cast<int>(i), j);
              });
}

Var Tape::outer_sum(Var s, Var t) {
  const Matrix& sv = value(s);
  const Matrix& tv = value(t);
  if (sv.cols() != 1 || tv.cols() != 1 || sv.rows() != tv.rows()) {
    throw ShapeError("outer_sum: wants two n x 1 columns, got " + sv.shape_str() +
                     " and " + tv.shape_str());
  }
  const int n = sv.rows();
  Matrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = sv(i, 0) + tv(j, 0);
  return push(std::move(out), needs_grad(s) || needs_grad(t),
              [is = s.id, it = t.id, n](Tape& tp, int self) {
                const Matrix& g = tp.nodes_[self].grad;
                if (tp.nodes_[is].needs_grad) {
                  Matrix ds(n, 1);
                  for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) ds(i, 0) += g(i, j);
                  add_in_place(tp.nodes_[is].grad, ds);
                }
                if (tp.nodes_[it].needs_grad) {
                  Matrix dt(n, 1);
                  for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) dt(j, 0) += g(i, j);
                  add_in_place(tp.nodes_[it].grad, dt);
                }
              });
}

Var Tape::scale_by(Var x, Var s) {
  const Matrix& sv = value(s);
  if (sv.rows() != 1 || sv.cols() != 1) {
    throw ShapeError("scale_by: scalar operand must be 1x1, got " + sv.shape_str());
  }
  Matrix out = hifinet::scale(value(x), sv(0, 0));
  return push(std::move(out), needs_grad(x) || needs_grad(s),
              [ix = x.id, is = s.id](Tape& t, int self) {
                const Matrix& g = t.nodes_[self].grad;
                const double s0 = t.nodes_[is].value(0, 0);
                if (t.nodes_[ix].needs_grad)
                  add_in_place(t.nodes_[ix].grad, hifinet::scale(g, s0));
                if (t.nodes_[is].needs_grad) {
                  double acc = 0.0;
                  const Matrix& xv = t.nodes_[ix].value;
                  for (int i = 0; i < xv.size(); ++i) acc += g.data()[i] * xv.data()[i];
                  t.nodes_[is].grad(0, 0) += acc;
                }
              });
}

Var Tape::sum_all(Var x) {
  Matrix out(1, 1, std::vector<double>{hifinet::sum_all(value(x))});
  return push(std::move(out), needs_grad(x), [ix = x.id](Tape& t, int self) {
    if (!t.nodes_[ix].needs_grad) return;
    const double g = t.nodes_[self].grad(0, 0);
    Matrix& dx = t.nodes_[ix].grad;
    for (double& v : dx.data()) v += g;
  });
}

Var Tape::row_l2_normalize(Var x, double eps) {
  Matrix out = hifinet::row_l2_normalize(value(x), eps);
  return push(std::move(out), needs_grad(x), [ix = x.id, eps](Tape& t, int self) {
    if (!t.nodes_[ix].needs_grad) return;
    const Matrix& xv = t.nodes_[ix].value;
    const Matrix& yv = t.nodes_[self].value;
    const Matrix& g = t.nodes_[self].grad;
    Matrix dx(xv.rows(), xv.cols());
    for (int i = 0; i < xv.rows(); ++i) {
      double sq = 0.0;
      for (int j = 0; j < xv.cols(); ++j) sq += xv(i, j) * xv(i, j);
      const double norm = std::max(std::sqrt(sq), eps);
      double dot = 0.0;
      for (int j = 0; j < xv.cols(); ++j) dot += yv(i, j) * g(i, j);
      const bool guarded = std::sqrt(sq) < eps;
      for (int j = 0; j < xv.cols(); ++j) {
        // Guarded rows degrade to dy/dx = I/eps.
        dx(i, j) = guarded ? g(i, j) / eps : (g(i, j) - yv(i, j) * dot) / norm;
      }
    }
    add_in_place(t.nodes_[ix].grad, dx);
  });
}

Var Tape::xlogx(Var x) {
  Matrix out = value(x);
  for (double& v : out.data()) v = v > kXLogXFloor ? v * std::log(v) : 0.0;
  return push(std::move(out), needs_grad(x), [ix = x.id](Tape& t, int self) {
    if (!t.nodes_[ix].needs_grad) return;
    const Matrix& xv = t.nodes_[ix].value;
    const Matrix& g = t.nodes_[self].grad;
    Matrix dx(xv.rows(), xv.cols());
    for (int i = 0; i < xv.size(); ++i) {
      const double xi = std::max(xv.data()[i], kXLogXFloor);
      dx.data()[i] = (std::log(xi) + 1.0) * g.data()[i];
    }
    add_in_place(t.nodes_[ix].grad, dx);
  });
}

Var Tape::cross_entropy_rows(Var logits, const std::vector<int>& targets) {
  const Matrix& lv = value(logits);
  if (static_cast<int>(targets.size()) != lv.rows()) {
    throw ShapeError("cross_entropy_rows: " + std::to_string(targets.size()) +
                     " targets for " + lv.shape_str() + " logits");
  }
  double total = 0.0;
  for (int i = 0; i < lv.rows(); ++i) {
    const int ti = targets[i];
    if (ti < 0 || ti >= lv.cols()) {
      throw ContractError("cross_entropy_rows: target " + std::to_string(ti) +
                          " out of range for row " + std::to_string(i));
    }
    double rowmax = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < lv.cols(); ++j) rowmax = std::max(rowmax, lv(i, j));
    double sum = 0.0;
    for (int j = 0; j < lv.cols(); ++j) sum += std::exp(lv(i, j) - rowmax);
    total += rowmax + std::log(sum) - lv(i, ti);
  }
  Matrix out(1, 1, std::vector<double>{total / lv.rows()});
  return push(std::move(out), needs_grad(logits),
              [il = logits.id, targets](Tape& t, int self) {
                if (!t.nodes_[il].needs_grad) return;
                const Matrix& lv = t.nodes_[il].value;
                const double g = t.nodes_[self].grad(0, 0);
                Matrix p = hifinet::softmax_rows(lv);
                const double inv_n = 1.0 / lv.rows();
                for (int i = 0; i < lv.rows(); ++i) p(i, targets[i]) -= 1.0;
                add_in_place(t.nodes_[il].grad, hifinet::scale(p, g * inv_n));
              });
}

void Tape::backward(Var loss) {
  check_owned(loss, "backward");
  const Matrix& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward: loss must be 1x1, got " + lv.shape_str());
  }
  node(loss).grad(0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.needs_grad && n.backprop) n.backprop(*this, i);
  }
}

void ParamStore::add(const std::string& name, Matrix value) {
  if (params_.count(name)) {
    throw ContractError("ParamStore: duplicate parameter '" + name + "'");
  }
  params_.emplace(name, std::move(value));
}

bool ParamStore::contains(const std::string& name) const { return params_.count(name) > 0; }

Matrix& ParamStore::value(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("ParamStore: unknown parameter '" + name + "'");
  return it->second;
}

const Matrix& ParamStore::value(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("ParamStore: unknown parameter '" + name + "'");
  return it->second;
}

std::map<std::string, Var> bind_params(Tape& tape, const ParamStore& store) {
  std::map<std::string, Var> bound;
  for (const auto& [name, value] : store.all()) {
    bound.emplace(name, tape.leaf(value));
  }
  return bound;
}

}  // namespace hifinet
