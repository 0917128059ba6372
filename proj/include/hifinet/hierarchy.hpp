// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0
//
// Segment -> locality -> region hierarchy: contextual embeddings, soft
// cross-attention assignments, feature aggregation, adjacency coarsening,
// single-head GAT layers, and top-down low-frequency propagation.

#pragma once

#include <vector>

#include "hifinet/roadnet.hpp"
#include "hifinet/tape.hpp"

namespace hifinet::hierarchy {

/// Binning metadata for the four attribute embeddings. Table values are
/// ordinary trainable parameters; this struct only maps attributes to rows.
struct EmbeddingLayout {
  int d_id = 4, d_ln = 4, d_sl = 4, d_ll = 4;
  int n_segments = 0;
  int lane_bins = 8;                     // lanes clipped to [1, 8]
  std::vector<double> length_bin_edges;  // strictly increasing interior edges
  double lon_min = 0, lon_max = 1, lat_min = 0, lat_max = 1;
  int geo_grid = 8;  // G; geo table has G*G rows

  int total_dim() const { return d_id + d_ln + d_sl + d_ll; }
  int length_bins() const { return static_cast<int>(length_bin_edges.size()) + 1; }
  int geo_bins() const { return geo_grid * geo_grid; }

  int lane_bin(int lane_count) const;
  int length_bin(double length_m) const;
  int geo_bin(double lon, double lat) const;

  /// Derives quantile length edges and the geo bounding box from the data.
  static EmbeddingLayout build(const roadnet::RoadNetwork& net, int d_id, int d_ln,
                               int d_sl, int d_ll, int len_bins, int geo_grid);
};

/// Precomputed per-segment table rows (id, lane, length, geo).
struct SegmentBins {
  std::vector<int> id, lane, length, geo;
};
SegmentBins segment_bins(const EmbeddingLayout& layout, const roadnet::RoadNetwork& net);

/// V_S row i = e_ID^i || e_LN^i || e_SL^i || e_LL^i.
Var contextual_embed(Tape& t, Var id_table, Var lane_table, Var length_table,
                     Var geo_table, const SegmentBins& bins);

/// H_S = relu(V_S W1 + b1) W2 + b2.
Var initial_features(Tape& t, Var v_s, Var w1, Var b1, Var w2, Var b2);

/// A = softmax_rows((H_c W_c)(H_p W_p)^T / sqrt(d)); rows stochastic.
Var soft_assignment(Tape& t, Var h_child, Var h_parent_init, Var w_child, Var w_parent);

/// H_parent = A^T H_child + H_parent_init.
Var aggregate_parent(Tape& t, Var assign, Var h_child, Var h_parent_init);

/// A_parent = A^T A_child A.
Var coarsen_adjacency(Tape& t, Var assign, Var a_child);

struct GatVars {
  Var w;     // d x d
  Var attn;  // 1 x 2d, [source half || destination half]
  double leaky_slope = 0.2;
};

using Neighborhoods = std::vector<std::vector<int>>;

/// Directed segment graph: in-neighbors plus self.
Neighborhoods in_neighbors_with_self(const Matrix& a_s);
/// Dense coarse graphs: the k largest off-diagonal entries per row plus self
/// (deterministic ties by lowest index).
Neighborhoods topk_with_self(const Matrix& weights, int k);
Matrix neighborhood_mask(const Neighborhoods& nbrs);

/// Single-head GAT: e_ij = leaky_relu(attn^T [W h_i || W h_j]), softmax over
/// j in N(i), h'_i = elu(sum_j alpha_ij W h_j). Every neighborhood must
/// contain the node itself.
Var gat_layer(Tape& t, Var h, const Neighborhoods& nbrs, const GatVars& params);

struct LowFreqInputs {
  Var h_r, a_r;  // region features and adjacency
  Var a_lr, a_l;
  Var a_sl;
  const Matrix* a_s = nullptr;  // binary segment adjacency
  int k_neighbors = 8;
};

/// Top-down propagation: GAT at the region level, unpool to localities and
/// refine, unpool to segments and refine. Returns H_S^l (N_S x d).
Var propagate_low_frequency(Tape& t, const LowFreqInputs& in, const GatVars& gat_region,
                            const GatVars& gat_locality, const GatVars& gat_segment);

}  // namespace hifinet::hierarchy
