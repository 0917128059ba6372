// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0
//
// Road-network data model: directed segment graph with attributes, trajectory
// sets, origin-destination matrices, a synthetic generator with a planted
// region/locality hierarchy, and the JSON file formats.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hifinet/matrix.hpp"

namespace hifinet::roadnet {

struct SegmentAttr {
  int id = 0;
  int lane_count = 1;      // >= 1
  double length_m = 1.0;   // > 0
  double lon = 0.0;
  double lat = 0.0;
  std::optional<int> label;     // planted region id on synthetic data
  std::optional<double> flow;   // traffic-flow signal, >= 0
};

struct RoadNetwork {
  std::vector<SegmentAttr> segments;
  // Directed edges as adjacency lists; A_S[i][j] = 1 iff j in out_edges[i].
  std::vector<std::vector<int>> out_edges;

  int n_segments() const { return static_cast<int>(segments.size()); }
  bool has_edge(int from, int to) const;
  /// Dense binary A_S (no self-loops).
  Matrix adjacency_matrix() const;
  /// Weakly-connected check by traversal over the symmetrized graph.
  bool weakly_connected() const;
};

struct TrajectorySet {
  std::vector<std::vector<int>> trajectories;  // each length >= 2
  std::size_t size() const { return trajectories.size(); }
};

struct OdMatrix {
  Matrix o;  // N_S x N_S, rows sum to 1 or 0
};

struct GeneratorConfig {
  int grid_width = 10;
  int grid_height = 10;
  int regions = 4;
  int localities_per_region = 3;
  int n_trajectories = 200;
  int traj_len_min = 4;
  int traj_len_max = 12;
  double p_stay = 0.8;  // probability a walk step stays inside its region
};

struct SyntheticBundle {
  RoadNetwork network;
  TrajectorySet trajectories;
  std::vector<int> labels;               // planted region id per segment
  std::vector<std::vector<int>> region_partition;    // segment ids per region
  std::vector<std::vector<int>> locality_partition;  // segment ids per locality
};

struct LoadStats {
  int dropped_self_loops = 0;
  int deduplicated_edges = 0;
};

/// Reads the network JSON schema. Self-loops are dropped and duplicate edges
/// deduplicated (both counted in stats). Malformed input throws LoadError
/// naming the offending field.
RoadNetwork load_network(const std::string& path, LoadStats* stats = nullptr);
RoadNetwork parse_network_json(const std::string& text, LoadStats* stats = nullptr);
void write_network(const RoadNetwork& net, const std::string& path);
std::string network_to_json(const RoadNetwork& net);

/// Trajectories file: one JSON array of segment ids per line.
TrajectorySet load_trajectories(const std::string& path, int n_segments);
void write_trajectories(const TrajectorySet& trajs, const std::string& path);

/// Grid-like planar network with R spatial regions split into localities,
/// lane counts growing toward the center, a smooth flow field plus
/// center-concentrated noise, and region-biased random-walk trajectories.
/// Deterministic in (cfg, seed).
SyntheticBundle generate_synthetic(const GeneratorConfig& cfg, std::uint64_t seed);

/// O[i][j] = #trajectories from first segment i to last segment j, rows
/// normalized to 1 (zero rows stay zero).
OdMatrix build_od_matrix(const TrajectorySet& trajs, int n_segments);

struct TrajectorySplit {
  TrajectorySet train, val, test;
};

/// Deterministic shuffled 7:1:2 split (floor(0.7 n) / floor(0.1 n) / rest).
TrajectorySplit split_trajectories(const TrajectorySet& trajs, std::uint64_t seed);

/// Deterministic shuffled 7:1:2 index split over [0, n).
struct IndexSplit {
  std::vector<int> train, val, test;
};
IndexSplit split_indices(int n, std::uint64_t seed);

}  // namespace hifinet::roadnet
