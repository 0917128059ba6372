// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#include "hifinet/roadnet.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "hifinet/rng.hpp"
#include "json.hpp"

namespace hifinet::roadnet {

using nlohmann::json;

bool RoadNetwork::has_edge(int from, int to) const {
  if (from < 0 || from >= n_segments()) return false;
  const auto& outs = out_edges[static_cast<std::size_t>(from)];
  return std::find(outs.begin(), outs.end(), to) != outs.end();
}

Matrix RoadNetwork::adjacency_matrix() const {
  const int n = n_segments();
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j : out_edges[static_cast<std::size_t>(i)]) a(i, j) = 1.0;
  return a;
}

bool RoadNetwork::weakly_connected() const {
  const int n = n_segments();
  if (n == 0) return true;
  std::vector<std::vector<int>> undirected(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j : out_edges[static_cast<std::size_t>(i)]) {
      undirected[static_cast<std::size_t>(i)].push_back(j);
      undirected[static_cast<std::size_t>(j)].push_back(i);
    }
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::deque<int> queue{0};
  seen[0] = true;
  int visited = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    ++visited;
    for (int v : undirected[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        queue.push_back(v);
      }
    }
  }
  return visited == n;
}

namespace {

json require_field(const json& obj, const char* field, const std::string& context) {
  if (!obj.contains(field)) {
    throw LoadError("missing field '" + std::string(field) + "' in " + context);
  }
  return obj.at(field);
}

}  // namespace

RoadNetwork parse_network_json(const std::string& text, LoadStats* stats) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(std::string("network file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw LoadError("network file: top level must be an object");

  RoadNetwork net;
  const json segs = require_field(root, "segments", "network file");
  if (!segs.is_array()) throw LoadError("network file: 'segments' must be an array");
  int pos = 0;
  for (const auto& s : segs) {
    const std::string ctx = "segment at position " + std::to_string(pos);
    SegmentAttr attr;
    attr.id = require_field(s, "id", ctx).get<int>();
    if (attr.id != pos) {
      throw LoadError(ctx + ": id " + std::to_string(attr.id) +
                      " must equal its list position");
    }
    attr.lane_count = require_field(s, "lanes", ctx).get<int>();
    if (attr.lane_count < 1) {
      throw LoadError(ctx + ": lanes must be >= 1, got " + std::to_string(attr.lane_count));
    }
    attr.length_m = require_field(s, "length_m", ctx).get<double>();
    if (!(attr.length_m > 0.0)) {
      throw LoadError(ctx + ": length_m must be > 0, got " + std::to_string(attr.length_m));
    }
    attr.lon = require_field(s, "lon", ctx).get<double>();
    attr.lat = require_field(s, "lat", ctx).get<double>();
    if (s.contains("label") && !s.at("label").is_null()) {
      attr.label = s.at("label").get<int>();
    }
    if (s.contains("flow") && !s.at("flow").is_null()) {
      const double f = s.at("flow").get<double>();
      if (f < 0.0) throw LoadError(ctx + ": flow must be >= 0, got " + std::to_string(f));
      attr.flow = f;
    }
    net.segments.push_back(attr);
    ++pos;
  }
  const int n = net.n_segments();
  net.out_edges.assign(static_cast<std::size_t>(n), {});

  const json edges = require_field(root, "edges", "network file");
  if (!edges.is_array()) throw LoadError("network file: 'edges' must be an array");
  LoadStats local;
  std::set<std::pair<int, int>> seen;
  int epos = 0;
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2) {
      throw LoadError("edge at position " + std::to_string(epos) + ": must be [from, to]");
    }
    const int from = e.at(0).get<int>();
    const int to = e.at(1).get<int>();
    for (int idx : {from, to}) {
      if (idx < 0 || idx >= n) {
        throw LoadError("edge at position " + std::to_string(epos) + ": index " +
                        std::to_string(idx) + " out of range [0, " + std::to_string(n) + ")");
      }
    }
    ++epos;
    if (from == to) {
      ++local.dropped_self_loops;
      continue;
    }
    if (!seen.insert({from, to}).second) {
      ++local.deduplicated_edges;
      continue;
    }
    net.out_edges[static_cast<std::size_t>(from)].push_back(to);
  }
  for (auto& outs : net.out_edges) std::sort(outs.begin(), outs.end());
  if (stats) *stats = local;
  return net;
}

RoadNetwork load_network(const std::string& path, LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open network file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_network_json(buf.str(), stats);
}

std::string network_to_json(const RoadNetwork& net) {
  json root;
  root["segments"] = json::array();
  for (const auto& s : net.segments) {
    json seg;
    seg["id"] = s.id;
    seg["lanes"] = s.lane_count;
    seg["length_m"] = s.length_m;
    seg["lon"] = s.lon;
    seg["lat"] = s.lat;
    seg["label"] = s.label ? json(*s.label) : json(nullptr);
    seg["flow"] = s.flow ? json(*s.flow) : json(nullptr);
    root["segments"].push_back(seg);
  }
  root["edges"] = json::array();
  for (int i = 0; i < net.n_segments(); ++i)
    for (int j : net.out_edges[static_cast<std::size_t>(i)])
      root["edges"].push_back(json::array({i, j}));
  return root.dump(2);
}

void write_network(const RoadNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write network file '" + path + "'");
  out << network_to_json(net) << "\n";
}

TrajectorySet load_trajectories(const std::string& path, int n_segments) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open trajectories file '" + path + "'");
  TrajectorySet set;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json arr;
    try {
      arr = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LoadError("trajectories line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!arr.is_array()) {
      throw LoadError("trajectories line " + std::to_string(lineno) + ": expected a JSON array");
    }
    std::vector<int> traj;
    for (const auto& v : arr) {
      const int id = v.get<int>();
      if (id < 0 || id >= n_segments) {
        throw LoadError("trajectories line " + std::to_string(lineno) + ": segment id " +
                        std::to_string(id) + " out of range");
      }
      traj.push_back(id);
    }
    if (traj.size() < 2) {
      throw LoadError("trajectories line " + std::to_string(lineno) +
                      ": trajectory must have length >= 2");
    }
    set.trajectories.push_back(std::move(traj));
  }
  return set;
}

void write_trajectories(const TrajectorySet& trajs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write trajectories file '" + path + "'");
  for (const auto& t : trajs.trajectories) {
    out << json(t).dump() << "\n";
  }
}

namespace {

// Spatial banding: splits [0, extent) positions into `bands` contiguous bands.
int band_of(int pos, int extent, int bands) {
  return std::min(bands - 1, pos * bands / extent);
}

// Factor r into rx * ry with rx <= ry, rx as close to sqrt(r) as possible.
std::pair<int, int> factor_grid(int r) {
  int rx = static_cast<int>(std::sqrt(static_cast<double>(r)));
  while (rx > 1 && r % rx != 0) --rx;
  return {rx, r / rx};
}

}  // namespace

SyntheticBundle generate_synthetic(const GeneratorConfig& cfg, std::uint64_t seed) {
  const int w = cfg.grid_width, h = cfg.grid_height;
  if (w < 1 || h < 1) throw ConfigError("generator: grid must be at least 1x1");
  const int n = w * h;
  if (cfg.regions < 1 || cfg.regions > n) {
    throw ConfigError("generator: regions must be in [1, " + std::to_string(n) + "], got " +
                      std::to_string(cfg.regions));
  }
  if (cfg.localities_per_region < 1 ||
      cfg.localities_per_region * cfg.regions > n) {
    throw ConfigError("generator: " + std::to_string(cfg.localities_per_region) +
                      " localities per region over " + std::to_string(cfg.regions) +
                      " regions does not fit " + std::to_string(n) + " segments");
  }
  if (cfg.traj_len_min < 2 || cfg.traj_len_max < cfg.traj_len_min) {
    throw ConfigError("generator: trajectory length bounds must satisfy 2 <= min <= max");
  }
  if (cfg.p_stay < 0.0 || cfg.p_stay > 1.0) {
    throw ConfigError("generator: p_stay must be in [0, 1]");
  }

  Rng rng(seed);
  SyntheticBundle out;
  auto& net = out.network;
  net.segments.resize(static_cast<std::size_t>(n));
  net.out_edges.assign(static_cast<std::size_t>(n), {});

  const auto [rx, ry] = factor_grid(cfg.regions);
  const auto [lx, ly] = factor_grid(cfg.localities_per_region);
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  const double max_dist = std::max(1.0, std::hypot(cx, cy));

  out.labels.resize(static_cast<std::size_t>(n));
  out.region_partition.assign(static_cast<std::size_t>(cfg.regions), {});
  out.locality_partition.assign(
      static_cast<std::size_t>(cfg.regions * cfg.localities_per_region), {});

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int id = y * w + x;
      SegmentAttr& s = net.segments[static_cast<std::size_t>(id)];
      s.id = id;
      const double dist = std::hypot(x - cx, y - cy) / max_dist;  // 0 center, 1 corner
      // Central segments get more lanes.
      const int lanes = static_cast<int>(std::lround(1.0 + 6.0 * (1.0 - dist) +
                                                     rng.uniform(-0.5, 0.5)));
      s.lane_count = std::clamp(lanes, 1, 8);
      s.length_m = rng.uniform(50.0, 500.0);
      s.lon = 116.0 + 0.002 * x + rng.uniform(-2e-4, 2e-4);
      s.lat = 39.5 + 0.002 * y + rng.uniform(-2e-4, 2e-4);

      const int region = band_of(y, h, ry) * rx + band_of(x, w, rx);
      s.label = region;
      out.labels[static_cast<std::size_t>(id)] = region;
      out.region_partition[static_cast<std::size_t>(region)].push_back(id);

      // Localities: sub-bands of grid position within the region's band.
      const int loc_in_region = band_of(y, h, ry * ly) % ly * lx + band_of(x, w, rx * lx) % lx;
      const int locality = region * cfg.localities_per_region +
                           std::min(loc_in_region, cfg.localities_per_region - 1);
      out.locality_partition[static_cast<std::size_t>(locality)].push_back(id);

      // Smooth base field plus noise whose scale is concentrated centrally.
      const double base =
          100.0 + 30.0 * std::sin(2.0 * 3.14159265358979323846 * x / std::max(1, w)) *
                      std::cos(2.0 * 3.14159265358979323846 * y / std::max(1, h));
      const double noise_scale = 2.0 + 60.0 * std::exp(-4.5 * dist * dist);
      s.flow = std::max(0.0, base + noise_scale * rng.normal());
    }
  }

  // 4-neighbor grid edges, both directions.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int id = y * w + x;
      if (x + 1 < w) {
        net.out_edges[static_cast<std::size_t>(id)].push_back(id + 1);
        net.out_edges[static_cast<std::size_t>(id + 1)].push_back(id);
      }
      if (y + 1 < h) {
        net.out_edges[static_cast<std::size_t>(id)].push_back(id + w);
        net.out_edges[static_cast<std::size_t>(id + w)].push_back(id);
      }
    }
  }
  for (auto& outs : net.out_edges) std::sort(outs.begin(), outs.end());

  // Region-biased random walks.
  for (int t = 0; t < cfg.n_trajectories; ++t) {
    const int len = cfg.traj_len_min + rng.below(cfg.traj_len_max - cfg.traj_len_min + 1);
    std::vector<int> traj{rng.below(n)};
    while (static_cast<int>(traj.size()) < len) {
      const int cur = traj.back();
      const auto& outs = net.out_edges[static_cast<std::size_t>(cur)];
      if (outs.empty()) break;
      std::vector<int> same_region;
      for (int v : outs) {
        if (out.labels[static_cast<std::size_t>(v)] == out.labels[static_cast<std::size_t>(cur)])
          same_region.push_back(v);
      }
      const bool stay = !same_region.empty() && rng.uniform() < cfg.p_stay;
      const auto& pool = stay ? same_region : outs;
      traj.push_back(pool[static_cast<std::size_t>(rng.below(static_cast<int>(pool.size())))]);
    }
    if (traj.size() >= 2) out.trajectories.trajectories.push_back(std::move(traj));
  }

  return out;
}

OdMatrix build_od_matrix(const TrajectorySet& trajs, int n_segments) {
  Matrix o(n_segments, n_segments);
  int idx = 0;
  for (const auto& t : trajs.trajectories) {
    for (int id : t) {
      if (id < 0 || id >= n_segments) {
        throw LoadError("od matrix: segment id " + std::to_string(id) +
                        " out of range in trajectory " + std::to_string(idx));
      }
    }
    o(t.front(), t.back()) += 1.0;
    ++idx;
  }
  for (int i = 0; i < n_segments; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n_segments; ++j) sum += o(i, j);
    if (sum > 0.0) {
      for (int j = 0; j < n_segments; ++j) o(i, j) /= sum;
    }
  }
  return OdMatrix{std::move(o)};
}

IndexSplit split_indices(int n, std::uint64_t seed) {
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const int n_train = static_cast<int>(std::floor(0.7 * n));
  const int n_val = static_cast<int>(std::floor(0.1 * n));
  IndexSplit split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  split.test.assign(order.begin() + n_train + n_val, order.end());
  return split;
}

TrajectorySplit split_trajectories(const TrajectorySet& trajs, std::uint64_t seed) {
  const int n = static_cast<int>(trajs.size());
  if (n < 10) {
    throw ContractError("split_trajectories: need at least 10 trajectories, got " +
                        std::to_string(n));
  }
  const IndexSplit idx = split_indices(n, seed);
  TrajectorySplit split;
  for (int i : idx.train) split.train.trajectories.push_back(trajs.trajectories[static_cast<std::size_t>(i)]);
  for (int i : idx.val) split.val.trajectories.push_back(trajs.trajectories[static_cast<std::size_t>(i)]);
  for (int i : idx.test) split.test.trajectories.push_back(trajs.trajectories[static_cast<std::size_t>(i)]);
  return split;
}

}  // namespace hifinet::roadnet
