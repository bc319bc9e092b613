#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "topoopt/error.hpp"
#include "topoopt/routing.hpp"

using namespace topoopt;

TEST_CASE("direct coin covers its own distance") {
  auto routes = coin_change_routes(12, {1, 5, 7, 11});
  CHECK(routes.at(5) == std::vector<int>{5});
}

TEST_CASE("distance 2 mod 12 takes two coins") {
  auto routes = coin_change_routes(12, {1, 5, 7, 11});
  CHECK(routes.at(2).size() == 2);
  int sum = 0;
  for (int c : routes.at(2)) sum += c;
  CHECK(sum % 12 == 2);
}

TEST_CASE("distance 14 mod 16 with coins {1,3,5,9} is two hops") {
  auto routes = coin_change_routes(16, {1, 3, 5, 9});
  CHECK(routes.at(14).size() == 2);
  int sum = 0;
  for (int c : routes.at(14)) sum += c;
  CHECK(sum % 16 == 14);
}

TEST_CASE("coin change matches the BFS oracle on random circulants") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 253);
    std::set<int> coin_set{1 + static_cast<int>(rng() % (n - 1))};
    while (coin_set.size() < 1 + rng() % 4) {
      coin_set.insert(1 + static_cast<int>(rng() % (n - 1)));
    }
    std::vector<int> coins(coin_set.begin(), coin_set.end());
    const std::vector<int> oracle = oracles::circulant_distances(n, coins);
    const bool reachable =
        std::all_of(oracle.begin() + 1, oracle.end(), [](int d) { return d >= 0; });
    if (!reachable) {
      CHECK_THROWS_AS(coin_change_routes(n, coins), Error);
      continue;
    }
    auto routes = coin_change_routes(n, coins);
    for (int m = 1; m < n; ++m) {
      CHECK(static_cast<int>(routes.at(m).size()) == oracle[m]);
      long long sum = 0;
      for (int c : routes.at(m)) sum += c;
      CHECK(sum % n == m);
    }
  }
}

TEST_CASE("coin change rejects degenerate coin sets") {
  CHECK_THROWS_AS(coin_change_routes(12, {4, 8}), Error);  // stuck on gcd 4 residues
  CHECK_THROWS_AS(coin_change_routes(12, {}), Error);
}

TEST_CASE("expand_route walks the modular path") {
  CHECK(expand_route(0, 2, {1, 1}, 12) == std::vector<int>{0, 1, 2});
  CHECK(expand_route(3, 8, {5}, 12) == std::vector<int>{3, 8});
  CHECK(expand_route(0, 2, {7, 7}, 12) == std::vector<int>{0, 7, 2});
}

TEST_CASE("expand_route rejects a stride sum that misses the target") {
  CHECK_THROWS_AS(expand_route(0, 3, {1, 1}, 12), Error);
}

TEST_CASE("expand_route over coin routes always lands on the destination") {
  auto routes = coin_change_routes(16, {1, 3, 5, 9});
  for (int src = 0; src < 16; ++src) {
    for (int m = 1; m < 16; ++m) {
      const int dst = (src + m) % 16;
      std::vector<int> path = expand_route(src, dst, routes.at(m), 16);
      CHECK(path.front() == src);
      CHECK(path.back() == dst);
    }
  }
}

namespace {

Topology ring_topology(int n, const std::vector<int>& strides) {
  Topology t(n, static_cast<int>(strides.size()));
  for (int p : strides) {
    for (int i = 0; i < n; ++i) {
      t.add_edge(TopoEdge{i, (i + p) % n, 1, EdgeTag::kAllReduce, 0, p});
    }
  }
  return t;
}

}  // namespace

TEST_CASE("a direct edge routes as a single hop") {
  Topology t = ring_topology(4, {1});
  auto paths = shortest_paths_pair(t, 0, 1, 2);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0] == std::vector<int>{0, 1});
}

TEST_CASE("two hops around the +1 ring") {
  Topology t = ring_topology(4, {1});
  auto paths = shortest_paths_pair(t, 0, 2, 1);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0] == std::vector<int>{0, 1, 2});
}

TEST_CASE("k-shortest enumeration matches the BFS oracle") {
  Topology t = ring_topology(8, {1, 3});
  std::vector<std::vector<int>> adj(8);
  for (const TopoEdge& e : t.edges()) adj[e.src].push_back(e.dst);
  for (auto& lst : adj) std::sort(lst.begin(), lst.end());

  for (int src = 0; src < 8; ++src) {
    for (int dst = 0; dst < 8; ++dst) {
      if (src == dst) continue;
      const auto oracle = oracles::all_min_hop_paths(adj, src, dst);
      auto got = shortest_paths_pair(t, src, dst, 16);
      REQUIRE(!oracle.empty());
      CHECK(got.size() == std::min<size_t>(oracle.size(), 16));
      for (size_t i = 0; i < got.size(); ++i) CHECK(got[i] == oracle[i]);
    }
  }
}

TEST_CASE("disconnected pairs raise") {
  Topology t(3, 1);
  t.add_edge(TopoEdge{0, 1, 1, EdgeTag::kFabric});
  CHECK_THROWS_WITH_AS(shortest_paths_pair(t, 0, 2, 1), doctest::Contains("disconnected"),
                       Error);
}

TEST_CASE("adding MP edges never lengthens shortest paths") {
  Topology rings = ring_topology(12, {1, 5});
  Topology with_mp = ring_topology(12, {1, 5});
  with_mp.add_edge(TopoEdge{0, 6, 1, EdgeTag::kMp});
  with_mp.add_edge(TopoEdge{6, 0, 1, EdgeTag::kMp});
  for (int src = 0; src < 12; ++src) {
    std::vector<int> base = rings.server_distances(src);
    std::vector<int> plus = with_mp.server_distances(src);
    for (int dst = 0; dst < 12; ++dst) CHECK(plus[dst] <= base[dst]);
  }
}

TEST_CASE("routing table exposes first paths per pair") {
  Topology t = ring_topology(6, {1});
  RoutingTable table;
  shortest_paths(t, {{0, 3}, {2, 4}}, 2, &table);
  REQUIRE(table.find_path(0, 3) != nullptr);
  CHECK(*table.find_path(0, 3) == std::vector<int>{0, 1, 2, 3});
  CHECK(table.find_path(4, 2) == nullptr);
}

TEST_CASE("finder routes cover every group distance") {
  JobSpec job;
  job.name = "dp";
  job.batch_per_gpu = 1;
  job.num_servers = 12;
  job.layers.push_back(LayerSpec{LayerKind::kDense, 1e8, 0.0, 5.0, 5.0});
  const TransferSet ts = derive_transfers(job, ParallelStrategy::pure_data_parallel(job));
  FinderResult fr = topology_finder(12, 3, ts);
  REQUIRE(fr.routes.allreduce_stride_routes.count(0) == 1);
  const auto& routes = fr.routes.allreduce_stride_routes.at(0);
  for (int m = 1; m < 12; ++m) {
    REQUIRE(routes.count(m) == 1);
    long long sum = 0;
    for (int c : routes.at(m)) sum += c;
    CHECK(sum % 12 == m);
  }
}
