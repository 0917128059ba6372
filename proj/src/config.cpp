// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#include "hifinet/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace hifinet {

using nlohmann::json;

void LossWeights::validate() const {
  for (double g : {gamma1, gamma2, gamma3, gamma4}) {
    if (g < 0.0) throw ConfigError("loss weights gamma1..gamma4 must be >= 0");
  }
  if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
  if (lambda < 0.0 || lambda > 1.0) throw ConfigError("lambda must be in [0, 1]");
}

int TrainConfig::resolved_n_l(int n_segments) const {
  if (n_l > 0) return n_l;
  const int scaled = std::max(2, (n_segments + 9) / 10);
  return std::min(200, scaled);
}

int TrainConfig::resolved_n_r(int n_segments) const {
  if (n_r > 0) return n_r;
  const int nl = resolved_n_l(n_segments);
  const int scaled = std::max(1, (nl + 2) / 3);
  return std::min(30, scaled);
}

void TrainConfig::validate(int n_segments) const {
  for (int dim : {d, d_id, d_ln, d_sl, d_ll, d_ff}) {
    if (dim < 1) throw ConfigError("all embedding/model dimensions must be >= 1");
  }
  if (n_blocks < 1) throw ConfigError("n_blocks must be >= 1");
  if (k_neighbors < 1) throw ConfigError("k_neighbors must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (len_bins < 1 || geo_grid < 1) throw ConfigError("len_bins and geo_grid must be >= 1");
  if (tgt_adjacency != "normalized" && tgt_adjacency != "raw") {
    throw ConfigError("tgt_adjacency must be 'normalized' or 'raw', got '" + tgt_adjacency + "'");
  }
  if (semantic_gram != "normalized" && semantic_gram != "raw") {
    throw ConfigError("semantic_gram must be 'normalized' or 'raw', got '" + semantic_gram + "'");
  }
  weights.validate();
  const int nl = resolved_n_l(n_segments);
  const int nr = resolved_n_r(n_segments);
  if (!(nr < nl && nl < n_segments)) {
    throw ConfigError("hierarchy sizes must satisfy N_R < N_L < N_S, got N_R=" +
                      std::to_string(nr) + ", N_L=" + std::to_string(nl) +
                      ", N_S=" + std::to_string(n_segments));
  }
}

TrainConfig config_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");

  static const std::set<std::string> known = {
      "d",        "d_id",       "d_ln",          "d_sl",
      "d_ll",     "d_ff",       "n_l",           "n_r",
      "n_blocks", "k_neighbors", "lr",            "epochs",
      "seed",     "gamma1",     "gamma2",        "gamma3",
      "gamma4",   "tau",        "lambda",        "share_gat",
      "tgt_adjacency", "semantic_gram", "od_from_train_only",
      "len_bins", "geo_grid"};
  for (const auto& [key, _] : root.items()) {
    if (!known.count(key)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }

  TrainConfig cfg;
  auto get_int = [&](const char* k, int& out) { if (root.contains(k)) out = root.at(k).get<int>(); };
  auto get_dbl = [&](const char* k, double& out) { if (root.contains(k)) out = root.at(k).get<double>(); };
  auto get_bool = [&](const char* k, bool& out) { if (root.contains(k)) out = root.at(k).get<bool>(); };
  auto get_str = [&](const char* k, std::string& out) { if (root.contains(k)) out = root.at(k).get<std::string>(); };

  get_int("d", cfg.d);
  get_int("d_id", cfg.d_id);
  get_int("d_ln", cfg.d_ln);
  get_int("d_sl", cfg.d_sl);
  get_int("d_ll", cfg.d_ll);
  get_int("d_ff", cfg.d_ff);
  get_int("n_l", cfg.n_l);
  get_int("n_r", cfg.n_r);
  get_int("n_blocks", cfg.n_blocks);
  get_int("k_neighbors", cfg.k_neighbors);
  get_dbl("lr", cfg.lr);
  get_int("epochs", cfg.epochs);
  if (root.contains("seed")) cfg.seed = root.at("seed").get<std::uint64_t>();
  get_dbl("gamma1", cfg.weights.gamma1);
  get_dbl("gamma2", cfg.weights.gamma2);
  get_dbl("gamma3", cfg.weights.gamma3);
  get_dbl("gamma4", cfg.weights.gamma4);
  get_dbl("tau", cfg.weights.tau);
  get_dbl("lambda", cfg.weights.lambda);
  get_bool("share_gat", cfg.share_gat);
  get_str("tgt_adjacency", cfg.tgt_adjacency);
  get_str("semantic_gram", cfg.semantic_gram);
  get_bool("od_from_train_only", cfg.od_from_train_only);
  get_int("len_bins", cfg.len_bins);
  get_int("geo_grid", cfg.geo_grid);
  return cfg;
}

std::string config_to_json(const TrainConfig& cfg) {
  json j;
  j["d"] = cfg.d;
  j["d_id"] = cfg.d_id;
  j["d_ln"] = cfg.d_ln;
  j["d_sl"] = cfg.d_sl;
  j["d_ll"] = cfg.d_ll;
  j["d_ff"] = cfg.d_ff;
  j["n_l"] = cfg.n_l;
  j["n_r"] = cfg.n_r;
  j["n_blocks"] = cfg.n_blocks;
  j["k_neighbors"] = cfg.k_neighbors;
  j["lr"] = cfg.lr;
  j["epochs"] = cfg.epochs;
  j["seed"] = cfg.seed;
  j["gamma1"] = cfg.weights.gamma1;
  j["gamma2"] = cfg.weights.gamma2;
  j["gamma3"] = cfg.weights.gamma3;
  j["gamma4"] = cfg.weights.gamma4;
  j["tau"] = cfg.weights.tau;
  j["lambda"] = cfg.weights.lambda;
  j["share_gat"] = cfg.share_gat;
  j["tgt_adjacency"] = cfg.tgt_adjacency;
  j["semantic_gram"] = cfg.semantic_gram;
  j["od_from_train_only"] = cfg.od_from_train_only;
  j["len_bins"] = cfg.len_bins;
  j["geo_grid"] = cfg.geo_grid;
  return j.dump(2);
}

}  // namespace hifinet
