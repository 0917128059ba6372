// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <set>

#include "doctest.h"
#include "hifinet/roadnet.hpp"

using namespace hifinet;
using namespace hifinet::roadnet;

TEST_CASE("load_network minimal file") {
  const std::string text = R"({
    "segments": [
      {"id": 0, "lanes": 2, "length_m": 120.0, "lon": 116.3, "lat": 39.9, "label": null, "flow": null},
      {"id": 1, "lanes": 1, "length_m": 80.0, "lon": 116.4, "lat": 39.8, "label": 3, "flow": 12.5}
    ],
    "edges": [[0, 1]]
  })";
  RoadNetwork net = parse_network_json(text);
  CHECK(net.n_segments() == 2);
  CHECK(net.has_edge(0, 1));
  CHECK(!net.has_edge(1, 0));
  CHECK(net.segments[1].label.value() == 3);
  CHECK(net.segments[1].flow.value() == doctest::Approx(12.5));
  Matrix a = net.adjacency_matrix();
  CHECK(a(0, 1) == 1.0);
  CHECK(a(1, 0) == 0.0);
}

TEST_CASE("load_network drops self-loops with a warning count") {
  const std::string text = R"({
    "segments": [
      {"id": 0, "lanes": 1, "length_m": 10.0, "lon": 0, "lat": 0},
      {"id": 1, "lanes": 1, "length_m": 10.0, "lon": 0, "lat": 1}
    ],
    "edges": [[0, 0], [0, 1], [0, 1]]
  })";
  LoadStats stats;
  RoadNetwork net = parse_network_json(text, &stats);
  CHECK(stats.dropped_self_loops == 1);
  CHECK(stats.deduplicated_edges == 1);
  CHECK(net.has_edge(0, 1));
  CHECK(!net.has_edge(0, 0));
}

TEST_CASE("load_network rejects out-of-range edge index") {
  const std::string text = R"({
    "segments": [
      {"id": 0, "lanes": 1, "length_m": 10.0, "lon": 0, "lat": 0},
      {"id": 1, "lanes": 1, "length_m": 10.0, "lon": 0, "lat": 1},
      {"id": 2, "lanes": 1, "length_m": 10.0, "lon": 0, "lat": 2}
    ],
    "edges": [[0, 5]]
  })";
  CHECK_THROWS_WITH_AS(parse_network_json(text), doctest::Contains("5"), LoadError);
}

TEST_CASE("load_network rejects malformed input") {
  CHECK_THROWS_AS(parse_network_json("{not json"), LoadError);
  CHECK_THROWS_AS(parse_network_json(R"({"segments": [], "edges": "x"})"), LoadError);
  const std::string bad_len = R"({
    "segments": [{"id": 0, "lanes": 1, "length_m": -5.0, "lon": 0, "lat": 0}],
    "edges": []
  })";
  CHECK_THROWS_WITH_AS(parse_network_json(bad_len), doctest::Contains("length_m"), LoadError);
}

TEST_CASE("network JSON round-trips to an identical structure") {
  SyntheticBundle bundle = generate_synthetic(GeneratorConfig{}, 42);
  const std::string text = network_to_json(bundle.network);
  RoadNetwork back = parse_network_json(text);
  REQUIRE(back.n_segments() == bundle.network.n_segments());
  for (int i = 0; i < back.n_segments(); ++i) {
    const auto& a = bundle.network.segments[static_cast<std::size_t>(i)];
    const auto& b = back.segments[static_cast<std::size_t>(i)];
    CHECK(a.id == b.id);
    CHECK(a.lane_count == b.lane_count);
    CHECK(a.length_m == b.length_m);
    CHECK(a.lon == b.lon);
    CHECK(a.lat == b.lat);
    CHECK(a.label == b.label);
    CHECK(a.flow == b.flow);
  }
  CHECK(back.out_edges == bundle.network.out_edges);
}

TEST_CASE("generator is deterministic") {
  GeneratorConfig cfg;
  cfg.grid_width = 10;
  cfg.grid_height = 10;
  cfg.regions = 4;
  cfg.n_trajectories = 100;
  SyntheticBundle a = generate_synthetic(cfg, 42);
  SyntheticBundle b = generate_synthetic(cfg, 42);
  CHECK(network_to_json(a.network) == network_to_json(b.network));
  CHECK(a.trajectories.trajectories == b.trajectories.trajectories);
  CHECK(a.labels == b.labels);
}

TEST_CASE("generator single region grid 2x2") {
  GeneratorConfig cfg;
  cfg.grid_width = 2;
  cfg.grid_height = 2;
  cfg.regions = 1;
  cfg.localities_per_region = 1;
  cfg.n_trajectories = 5;
  cfg.traj_len_min = 2;
  cfg.traj_len_max = 3;
  SyntheticBundle bundle = generate_synthetic(cfg, 1);
  CHECK(bundle.network.n_segments() == 4);
  for (int label : bundle.labels) CHECK(label == 0);
}

TEST_CASE("generator rejects unsatisfiable configs") {
  GeneratorConfig cfg;
  cfg.grid_width = 2;
  cfg.grid_height = 2;
  cfg.regions = 2;
  cfg.localities_per_region = 3;  // 6 localities > 4 segments
  CHECK_THROWS_AS(generate_synthetic(cfg, 1), ConfigError);
}

TEST_CASE("generated networks are weakly connected and walks follow edges") {
  GeneratorConfig cfg;
  cfg.grid_width = 8;
  cfg.grid_height = 6;
  cfg.regions = 4;
  cfg.n_trajectories = 50;
  SyntheticBundle bundle = generate_synthetic(cfg, 9);
  CHECK(bundle.network.weakly_connected());
  for (const auto& traj : bundle.trajectories.trajectories) {
    REQUIRE(traj.size() >= 2);
    for (std::size_t s = 0; s + 1 < traj.size(); ++s) {
      CHECK(bundle.network.has_edge(traj[s], traj[s + 1]));
    }
  }
}

TEST_CASE("flow noise concentrates centrally") {
  GeneratorConfig cfg;
  cfg.grid_width = 20;
  cfg.grid_height = 20;
  cfg.regions = 9;
  cfg.localities_per_region = 2;
  SyntheticBundle bundle = generate_synthetic(cfg, 7);
  const int n = bundle.network.n_segments();
  // Quartiles by distance from the grid center.
  std::vector<std::pair<double, int>> by_dist;
  const double cx = (cfg.grid_width - 1) / 2.0, cy = (cfg.grid_height - 1) / 2.0;
  for (int i = 0; i < n; ++i) {
    const int x = i % cfg.grid_width, y = i / cfg.grid_width;
    by_dist.push_back({std::hypot(x - cx, y - cy), i});
  }
  std::sort(by_dist.begin(), by_dist.end());
  auto variance = [&](int lo, int hi) {
    double mean = 0.0;
    for (int i = lo; i < hi; ++i)
      mean += *bundle.network.segments[static_cast<std::size_t>(by_dist[static_cast<std::size_t>(i)].second)].flow;
    mean /= (hi - lo);
    double var = 0.0;
    for (int i = lo; i < hi; ++i) {
      const double f =
          *bundle.network.segments[static_cast<std::size_t>(by_dist[static_cast<std::size_t>(i)].second)].flow;
      var += (f - mean) * (f - mean);
    }
    return var / (hi - lo);
  };
  const double central = variance(0, n / 4);
  const double peripheral = variance(3 * n / 4, n);
  CHECK(central > peripheral);
}

TEST_CASE("od matrix single trip") {
  TrajectorySet trajs;
  trajs.trajectories = {{0, 2, 3}};
  OdMatrix od = build_od_matrix(trajs, 4);
  CHECK(od.o(0, 3) == 1.0);
  double total = 0.0;
  for (double v : od.o.data()) total += v;
  CHECK(total == 1.0);
}

TEST_CASE("od matrix count-and-normalize") {
  TrajectorySet trajs;
  trajs.trajectories = {{0, 1}, {0, 2}};
  OdMatrix od = build_od_matrix(trajs, 4);
  CHECK(od.o(0, 1) == doctest::Approx(0.5));
  CHECK(od.o(0, 2) == doctest::Approx(0.5));
  for (int j = 0; j < 4; ++j) {
    CHECK(od.o(1, j) == 0.0);
  }
}

TEST_CASE("od matrix empty set and row-sum invariant") {
  OdMatrix empty = build_od_matrix(TrajectorySet{}, 3);
  for (double v : empty.o.data()) CHECK(v == 0.0);

  SyntheticBundle bundle = generate_synthetic(GeneratorConfig{}, 3);
  OdMatrix od = build_od_matrix(bundle.trajectories, bundle.network.n_segments());
  for (int i = 0; i < od.o.rows(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < od.o.cols(); ++j) {
      CHECK(od.o(i, j) >= 0.0);
      sum += od.o(i, j);
    }
    CHECK((std::abs(sum - 1.0) < 1e-12 || sum == 0.0));
  }
}

TEST_CASE("od matrix rejects out-of-range ids") {
  TrajectorySet trajs;
  trajs.trajectories = {{0, 9}};
  CHECK_THROWS_WITH_AS(build_od_matrix(trajs, 4), doctest::Contains("9"), LoadError);
}

TEST_CASE("trajectory split sizes") {
  auto make = [](int n) {
    TrajectorySet set;
    for (int i = 0; i < n; ++i) set.trajectories.push_back({i % 3, (i + 1) % 3});
    return set;
  };
  TrajectorySplit s10 = split_trajectories(make(10), 1);
  CHECK(s10.train.size() == 7);
  CHECK(s10.val.size() == 1);
  CHECK(s10.test.size() == 2);

  TrajectorySplit s23 = split_trajectories(make(23), 1);
  CHECK(s23.train.size() == 16);
  CHECK(s23.val.size() == 2);
  CHECK(s23.test.size() == 5);

  TrajectorySplit a = split_trajectories(make(100), 5);
  TrajectorySplit b = split_trajectories(make(100), 5);
  CHECK(a.train.trajectories == b.train.trajectories);
  CHECK(a.val.trajectories == b.val.trajectories);
  CHECK(a.test.trajectories == b.test.trajectories);

  CHECK_THROWS_AS(split_trajectories(make(9), 1), ContractError);
}

TEST_CASE("index split partitions [0, n)") {
  IndexSplit split = split_indices(50, 11);
  std::set<int> all;
  for (int i : split.train) all.insert(i);
  for (int i : split.val) all.insert(i);
  for (int i : split.test) all.insert(i);
  CHECK(all.size() == 50);
  CHECK(split.train.size() == 35);
  CHECK(split.val.size() == 5);
  CHECK(split.test.size() == 10);
}
