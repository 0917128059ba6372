// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#include "hifinet/model.hpp"

#include <cmath>

#include "hifinet/rng.hpp"

namespace hifinet::model {

namespace {

constexpr double kLayerNormEps = 1e-5;

Matrix xavier_uniform(Rng& rng, int rows, int cols) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-limit, limit);
  return m;
}

Matrix small_normal(Rng& rng, int rows, int cols, double scale = 0.1) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = scale * rng.normal();
  return m;
}

std::string block_name(const std::string& stream, int i, const char* field) {
  return "tgt/" + stream + "/block" + (i < 10 ? "0" : "") + std::to_string(i) + "/" + field;
}

void add_tgt_stream(ParamStore& store, Rng& rng, const std::string& stream,
                    const TrainConfig& cfg) {
  for (int i = 0; i < cfg.n_blocks; ++i) {
    store.add(block_name(stream, i, "w_q"), xavier_uniform(rng, cfg.d, cfg.d));
    store.add(block_name(stream, i, "w_k"), xavier_uniform(rng, cfg.d, cfg.d));
    store.add(block_name(stream, i, "w_v"), xavier_uniform(rng, cfg.d, cfg.d));
    store.add(block_name(stream, i, "ffn_w1"), xavier_uniform(rng, cfg.d, cfg.d_ff));
    store.add(block_name(stream, i, "ffn_b1"), Matrix(1, cfg.d_ff));
    store.add(block_name(stream, i, "ffn_w2"), xavier_uniform(rng, cfg.d_ff, cfg.d));
    store.add(block_name(stream, i, "ffn_b2"), Matrix(1, cfg.d));
    store.add(block_name(stream, i, "ln1_gain"), Matrix(1, cfg.d, 1.0));
    store.add(block_name(stream, i, "ln1_bias"), Matrix(1, cfg.d));
    store.add(block_name(stream, i, "ln2_gain"), Matrix(1, cfg.d, 1.0));
    store.add(block_name(stream, i, "ln2_bias"), Matrix(1, cfg.d));
  }
  store.add("tgt/" + stream + "/alpha_logit", Matrix(1, 1));
}

hierarchy::GatVars gat_vars(const std::map<std::string, Var>& p, const std::string& level,
                            bool shared) {
  const std::string base = shared ? "gat/shared/" : "gat/" + level + "/";
  return hierarchy::GatVars{p.at(base + "w"), p.at(base + "attn"), 0.2};
}

freq::TgtStreamVars tgt_stream_vars(const std::map<std::string, Var>& p,
                                    const std::string& stream, int n_blocks) {
  freq::TgtStreamVars vars;
  for (int i = 0; i < n_blocks; ++i) {
    freq::TgtBlockVars b;
    b.w_q = p.at(block_name(stream, i, "w_q"));
    b.w_k = p.at(block_name(stream, i, "w_k"));
    b.w_v = p.at(block_name(stream, i, "w_v"));
    b.ffn_w1 = p.at(block_name(stream, i, "ffn_w1"));
    b.ffn_b1 = p.at(block_name(stream, i, "ffn_b1"));
    b.ffn_w2 = p.at(block_name(stream, i, "ffn_w2"));
    b.ffn_b2 = p.at(block_name(stream, i, "ffn_b2"));
    b.ln1_gain = p.at(block_name(stream, i, "ln1_gain"));
    b.ln1_bias = p.at(block_name(stream, i, "ln1_bias"));
    b.ln2_gain = p.at(block_name(stream, i, "ln2_gain"));
    b.ln2_bias = p.at(block_name(stream, i, "ln2_bias"));
    vars.blocks.push_back(b);
  }
  vars.alpha_logit = p.at("tgt/" + stream + "/alpha_logit");
  return vars;
}

}  // namespace

Dataset Dataset::build(roadnet::RoadNetwork net, roadnet::TrajectorySet trajs,
                       const TrainConfig& cfg) {
  cfg.validate(net.n_segments());
  Dataset data;
  data.a_s = net.adjacency_matrix();
  data.a_hat = cfg.tgt_adjacency == "normalized"
                   ? freq::normalized_adjacency_with_self(data.a_s)
                   : data.a_s;
  if (cfg.od_from_train_only && trajs.size() >= 10) {
    data.od = roadnet::build_od_matrix(roadnet::split_trajectories(trajs, cfg.seed).train,
                                       net.n_segments()).o;
  } else {
    data.od = roadnet::build_od_matrix(trajs, net.n_segments()).o;
  }
  data.layout = hierarchy::EmbeddingLayout::build(net, cfg.d_id, cfg.d_ln, cfg.d_sl,
                                                  cfg.d_ll, cfg.len_bins, cfg.geo_grid);
  data.bins = hierarchy::segment_bins(data.layout, net);
  data.network = std::move(net);
  data.trajectories = std::move(trajs);
  return data;
}

ParamStore init_params(const TrainConfig& cfg, const Dataset& data, std::uint64_t seed) {
  const int n_s = data.n_segments();
  const int n_l = cfg.resolved_n_l(n_s);
  const int n_r = cfg.resolved_n_r(n_s);
  Rng rng(seed);
  ParamStore store;

  store.add("embed/id_table", small_normal(rng, n_s, cfg.d_id));
  store.add("embed/lane_table", small_normal(rng, data.layout.lane_bins, cfg.d_ln));
  store.add("embed/length_table", small_normal(rng, data.layout.length_bins(), cfg.d_sl));
  store.add("embed/geo_table", small_normal(rng, data.layout.geo_bins(), cfg.d_ll));

  store.add("init_ffn/w1", xavier_uniform(rng, cfg.d_prime(), cfg.d));
  store.add("init_ffn/b1", Matrix(1, cfg.d));
  store.add("init_ffn/w2", xavier_uniform(rng, cfg.d, cfg.d));
  store.add("init_ffn/b2", Matrix(1, cfg.d));

  store.add("assign/sl/w_child", xavier_uniform(rng, cfg.d, cfg.d));
  store.add("assign/sl/w_parent", xavier_uniform(rng, cfg.d, cfg.d));
  store.add("assign/lr/w_child", xavier_uniform(rng, cfg.d, cfg.d));
  store.add("assign/lr/w_parent", xavier_uniform(rng, cfg.d, cfg.d));

  store.add("hier/h_l_init", small_normal(rng, n_l, cfg.d));
  store.add("hier/h_r_init", small_normal(rng, n_r, cfg.d));

  if (cfg.share_gat) {
    store.add("gat/shared/w", xavier_uniform(rng, cfg.d, cfg.d));
    store.add("gat/shared/attn", xavier_uniform(rng, 1, 2 * cfg.d));
  } else {
    for (const char* level : {"region", "locality", "segment"}) {
      store.add(std::string("gat/") + level + "/w", xavier_uniform(rng, cfg.d, cfg.d));
      store.add(std::string("gat/") + level + "/attn", xavier_uniform(rng, 1, 2 * cfg.d));
    }
  }

  add_tgt_stream(store, rng, "low", cfg);
  add_tgt_stream(store, rng, "high", cfg);
  store.add("recon/beta_logit", Matrix(1, 1));
  return store;
}

ForwardState forward(Tape& t, const std::map<std::string, Var>& params,
                     const Dataset& data, const TrainConfig& cfg) {
  ForwardState st;
  st.v_s = hierarchy::contextual_embed(t, params.at("embed/id_table"),
                                       params.at("embed/lane_table"),
                                       params.at("embed/length_table"),
                                       params.at("embed/geo_table"), data.bins);
  st.h_s = hierarchy::initial_features(t, st.v_s, params.at("init_ffn/w1"),
                                       params.at("init_ffn/b1"), params.at("init_ffn/w2"),
                                       params.at("init_ffn/b2"));

  Var h_l_init = params.at("hier/h_l_init");
  Var h_r_init = params.at("hier/h_r_init");
  Var a_s_const = t.constant(data.a_s);

  st.a_sl = hierarchy::soft_assignment(t, st.h_s, h_l_init, params.at("assign/sl/w_child"),
                                       params.at("assign/sl/w_parent"));
  st.h_l = hierarchy::aggregate_parent(t, st.a_sl, st.h_s, h_l_init);
  st.a_l = hierarchy::coarsen_adjacency(t, st.a_sl, a_s_const);

  st.a_lr = hierarchy::soft_assignment(t, st.h_l, h_r_init, params.at("assign/lr/w_child"),
                                       params.at("assign/lr/w_parent"));
  st.h_r = hierarchy::aggregate_parent(t, st.a_lr, st.h_l, h_r_init);
  st.a_r = hierarchy::coarsen_adjacency(t, st.a_lr, st.a_l);

  hierarchy::LowFreqInputs low_in;
  low_in.h_r = st.h_r;
  low_in.a_r = st.a_r;
  low_in.a_lr = st.a_lr;
  low_in.a_l = st.a_l;
  low_in.a_sl = st.a_sl;
  low_in.a_s = &data.a_s;
  low_in.k_neighbors = cfg.k_neighbors;
  st.h_s_low = hierarchy::propagate_low_frequency(
      t, low_in, gat_vars(params, "region", cfg.share_gat),
      gat_vars(params, "locality", cfg.share_gat),
      gat_vars(params, "segment", cfg.share_gat));

  st.h_s_high = freq::decompose(t, st.h_s, st.h_s_low);

  Var a_hat_const = t.constant(data.a_hat);
  st.h_low_updated = freq::tgt(t, st.h_s_low, a_hat_const,
                               tgt_stream_vars(params, "low", cfg.n_blocks), kLayerNormEps);
  st.h_high_updated = freq::tgt(t, st.h_s_high, a_hat_const,
                                tgt_stream_vars(params, "high", cfg.n_blocks), kLayerNormEps);
  st.h_hat = freq::reconstruct(t, st.h_low_updated, st.h_high_updated,
                               params.at("recon/beta_logit"));
  return st;
}

}  // namespace hifinet::model
