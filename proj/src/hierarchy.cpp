// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#include "hifinet/hierarchy.hpp"

#include <algorithm>
#include <cmath>

namespace hifinet::hierarchy {

int EmbeddingLayout::lane_bin(int lane_count) const {
  return std::clamp(lane_count, 1, lane_bins) - 1;
}

int EmbeddingLayout::length_bin(double length_m) const {
  // Count of edges <= value; out-of-range lengths clip to the boundary bins.
  int lo = 0, hi = static_cast<int>(length_bin_edges.size());
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (length_bin_edges[static_cast<std::size_t>(mid)] <= length_m) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

int EmbeddingLayout::geo_bin(double lon, double lat) const {
  auto cell = [this](double v, double lo, double hi) {
    if (!(hi > lo)) return 0;
    const int c = static_cast<int>((v - lo) / (hi - lo) * geo_grid);
    return std::clamp(c, 0, geo_grid - 1);
  };
  return cell(lat, lat_min, lat_max) * geo_grid + cell(lon, lon_min, lon_max);
}

EmbeddingLayout EmbeddingLayout::build(const roadnet::RoadNetwork& net, int d_id,
                                       int d_ln, int d_sl, int d_ll, int len_bins,
                                       int geo_grid) {
  if (net.n_segments() == 0) throw ContractError("EmbeddingLayout: empty network");
  EmbeddingLayout layout;
  layout.d_id = d_id;
  layout.d_ln = d_ln;
  layout.d_sl = d_sl;
  layout.d_ll = d_ll;
  layout.n_segments = net.n_segments();
  layout.geo_grid = geo_grid;

  std::vector<double> lengths;
  layout.lon_min = layout.lat_min = 1e300;
  layout.lon_max = layout.lat_max = -1e300;
  for (const auto& s : net.segments) {
    lengths.push_back(s.length_m);
    layout.lon_min = std::min(layout.lon_min, s.lon);
    layout.lon_max = std::max(layout.lon_max, s.lon);
    layout.lat_min = std::min(layout.lat_min, s.lat);
    layout.lat_max = std::max(layout.lat_max, s.lat);
  }
  std::sort(lengths.begin(), lengths.end());
  // Quantile edges, deduplicated to keep them strictly increasing.
  for (int b = 1; b < len_bins; ++b) {
    const std::size_t idx = static_cast<std::size_t>(
        static_cast<double>(b) * lengths.size() / len_bins);
    const double edge = lengths[std::min(idx, lengths.size() - 1)];
    if (layout.length_bin_edges.empty() || edge > layout.length_bin_edges.back()) {
      layout.length_bin_edges.push_back(edge);
    }
  }
  return layout;
}

SegmentBins segment_bins(const EmbeddingLayout& layout, const roadnet::RoadNetwork& net) {
  if (net.n_segments() != layout.n_segments) {
    throw ContractError("segment_bins: layout built for " +
                        std::to_string(layout.n_segments) + " segments, network has " +
                        std::to_string(net.n_segments()));
  }
  SegmentBins bins;
  for (const auto& s : net.segments) {
    bins.id.push_back(s.id);
    bins.lane.push_back(layout.lane_bin(s.lane_count));
    bins.length.push_back(layout.length_bin(s.length_m));
    bins.geo.push_back(layout.geo_bin(s.lon, s.lat));
  }
  return bins;
}

Var contextual_embed(Tape& t, Var id_table, Var lane_table, Var length_table,
                     Var geo_table, const SegmentBins& bins) {
  Var e_id = t.gather_rows(id_table, bins.id);
  Var e_ln = t.gather_rows(lane_table, bins.lane);
  Var e_sl = t.gather_rows(length_table, bins.length);
  Var e_ll = t.gather_rows(geo_table, bins.geo);
  return t.concat_cols({e_id, e_ln, e_sl, e_ll});
}

Var initial_features(Tape& t, Var v_s, Var w1, Var b1, Var w2, Var b2) {
  Var hidden = t.relu(t.add_row_broadcast(t.matmul(v_s, w1), b1));
  return t.add_row_broadcast(t.matmul(hidden, w2), b2);
}

Var soft_assignment(Tape& t, Var h_child, Var h_parent_init, Var w_child, Var w_parent) {
  const int d = t.value(w_child).cols();
  Var logits = t.matmul(t.matmul(h_child, w_child),
                        t.transpose(t.matmul(h_parent_init, w_parent)));
  return t.softmax_rows(t.scale(logits, 1.0 / std::sqrt(static_cast<double>(d))));
}

Var aggregate_parent(Tape& t, Var assign, Var h_child, Var h_parent_init) {
  return t.add(t.matmul(t.transpose(assign), h_child), h_parent_init);
}

Var coarsen_adjacency(Tape& t, Var assign, Var a_child) {
  return t.matmul(t.matmul(t.transpose(assign), a_child), assign);
}

Neighborhoods in_neighbors_with_self(const Matrix& a_s) {
  const int n = a_s.rows();
  Neighborhoods nbrs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& nb = nbrs[static_cast<std::size_t>(i)];
    nb.push_back(i);
    for (int j = 0; j < n; ++j) {
      if (j != i && a_s(j, i) != 0.0) nb.push_back(j);
    }
    std::sort(nb.begin(), nb.end());
  }
  return nbrs;
}

Neighborhoods topk_with_self(const Matrix& weights, int k) {
  const int n = weights.rows();
  Neighborhoods nbrs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<int> others;
    for (int j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    std::stable_sort(others.begin(), others.end(),
                     [&](int a, int b) { return weights(i, a) > weights(i, b); });
    auto& nb = nbrs[static_cast<std::size_t>(i)];
    nb.push_back(i);
    for (int j = 0; j < std::min(k, static_cast<int>(others.size())); ++j) {
      nb.push_back(others[static_cast<std::size_t>(j)]);
    }
    std::sort(nb.begin(), nb.end());
  }
  return nbrs;
}

Matrix neighborhood_mask(const Neighborhoods& nbrs) {
  const int n = static_cast<int>(nbrs.size());
  Matrix mask(n, n);
  for (int i = 0; i < n; ++i)
    for (int j : nbrs[static_cast<std::size_t>(i)]) mask(i, j) = 1.0;
  return mask;
}

Var gat_layer(Tape& t, Var h, const Neighborhoods& nbrs, const GatVars& params) {
  const int n = t.value(h).rows();
  const int d = t.value(h).cols();
  if (static_cast<int>(nbrs.size()) != n) {
    throw ContractError("gat_layer: " + std::to_string(nbrs.size()) +
                        " neighborhoods for " + std::to_string(n) + " nodes");
  }
  for (int i = 0; i < n; ++i) {
    const auto& nb = nbrs[static_cast<std::size_t>(i)];
    if (std::find(nb.begin(), nb.end(), i) == nb.end()) {
      throw ContractError("gat_layer: neighborhood of node " + std::to_string(i) +
                          " does not contain the node itself");
    }
  }
  Var hw = t.matmul(h, params.w);
  Var a_src = t.transpose(t.slice_cols(params.attn, 0, d));
  Var a_dst = t.transpose(t.slice_cols(params.attn, d, d));
  Var e = t.leaky_relu(t.outer_sum(t.matmul(hw, a_src), t.matmul(hw, a_dst)),
                       params.leaky_slope);
  Var att = t.masked_softmax_rows(e, neighborhood_mask(nbrs));
  return t.elu(t.matmul(att, hw));
}

Var propagate_low_frequency(Tape& t, const LowFreqInputs& in, const GatVars& gat_region,
                            const GatVars& gat_locality, const GatVars& gat_segment) {
  if (!in.a_s) throw ContractError("propagate_low_frequency: missing segment adjacency");
  for (Var v : {in.h_r, in.a_r, in.a_lr, in.a_l, in.a_sl}) {
    if (!v.valid()) throw ContractError("propagate_low_frequency: missing state field");
  }
  // Neighborhood selection reads current values; gradients do not flow
  // through the selection itself.
  Var h_r_tilde =
      gat_layer(t, in.h_r, topk_with_self(t.value(in.a_r), in.k_neighbors), gat_region);
  Var h_l_low = gat_layer(t, t.matmul(in.a_lr, h_r_tilde),
                          topk_with_self(t.value(in.a_l), in.k_neighbors), gat_locality);
  return gat_layer(t, t.matmul(in.a_sl, h_l_low), in_neighbors_with_self(*in.a_s),
                   gat_segment);
}

}  // namespace hifinet::hierarchy
