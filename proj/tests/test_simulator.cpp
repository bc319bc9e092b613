#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "topoopt/error.hpp"
#include "topoopt/simulator.hpp"
#include "topoopt/topology.hpp"

using namespace topoopt;

namespace {

Topology line_topology(int n) {
  Topology t(n, 2);
  for (int i = 0; i + 1 < n; ++i) {
    t.add_edge(TopoEdge{i, i + 1, 1, EdgeTag::kFabric});
    t.add_edge(TopoEdge{i + 1, i, 1, EdgeTag::kFabric});
  }
  return t;
}

Task comm(int id, int src, int dst, double bytes, std::vector<int> path = {},
          std::vector<int> deps = {}) {
  Task t;
  t.id = id;
  t.kind = Task::Kind::kComm;
  t.src = src;
  t.dst = dst;
  t.bytes = bytes;
  t.path = std::move(path);
  t.deps = std::move(deps);
  return t;
}

Task compute(int id, double duration, std::vector<int> deps = {}) {
  Task t;
  t.id = id;
  t.kind = Task::Kind::kCompute;
  t.duration_us = duration;
  t.deps = std::move(deps);
  return t;
}

TrafficMatrix demand(int n, std::initializer_list<std::tuple<int, int, double>> cells) {
  TrafficMatrix tm;
  tm.n = n;
  tm.bytes.assign(static_cast<size_t>(n) * n, 0.0);
  for (const auto& [i, j, v] : cells) tm.at(i, j) = v;
  return tm;
}

}  // namespace

TEST_CASE("one 1 GB flow over one 100 Gbps hop takes 80000 + 1 us") {
  Topology t = line_topology(2);
  SimResult r = simulate({comm(0, 0, 1, 1e9, {0, 1})}, t, 100.0);
  CHECK(r.iteration_time_us == doctest::Approx(80001.0));
  CHECK(r.bandwidth_tax == doctest::Approx(1.0));
}

TEST_CASE("two equal flows share the link max-min") {
  Topology t = line_topology(2);
  SimResult r = simulate({comm(0, 0, 1, 1e9, {0, 1}), comm(1, 0, 1, 1e9, {0, 1})}, t, 100.0);
  CHECK(r.iteration_time_us == doctest::Approx(160001.0));
}

TEST_CASE("a 3-hop flow and a crossing 1-hop flow split the middle link") {
  Topology t = line_topology(4);
  std::vector<Task> tasks = {comm(0, 0, 3, 1e9, {0, 1, 2, 3}), comm(1, 1, 2, 1e9, {1, 2})};
  SimResult r = simulate(tasks, t, 100.0);
  REQUIRE(r.flows.size() == 2);
  // Both bottlenecked at B/2 on (1,2): 160000 us of transfer.
  for (const FlowRecord& f : r.flows) {
    CHECK(f.finish_us - f.start_us - f.hops * 1.0 == doctest::Approx(160000.0));
  }
}

TEST_CASE("per-flow wire bytes equal path length times flow bytes") {
  Topology t = line_topology(4);
  SimResult r = simulate({comm(0, 0, 3, 5e8, {0, 1, 2, 3})}, t, 100.0);
  CHECK(r.logical_bytes == doctest::Approx(5e8));
  CHECK(r.wire_bytes == doctest::Approx(3 * 5e8));
  CHECK(r.link_bytes.at({0, 1}) == doctest::Approx(5e8));
  CHECK(r.link_bytes.at({1, 2}) == doctest::Approx(5e8));
  CHECK(r.link_bytes.at({2, 3}) == doctest::Approx(5e8));
}

TEST_CASE("bandwidth tax is exactly 1.0 for single-hop runs") {
  Topology t = line_topology(3);
  SimResult r = simulate({comm(0, 0, 1, 1e8, {0, 1}), comm(1, 1, 2, 3e8, {1, 2})}, t, 40.0);
  CHECK(r.bandwidth_tax == 1.0);
}

TEST_CASE("bandwidth tax is exactly 2.0 when every flow relays once") {
  Topology t = line_topology(3);
  SimResult r = simulate({comm(0, 0, 2, 1e8, {0, 1, 2}), comm(1, 2, 0, 2e8, {2, 1, 0})}, t, 40.0);
  CHECK(r.bandwidth_tax == 2.0);
}

TEST_CASE("compute chains add up and gate communication") {
  Topology t = line_topology(2);
  std::vector<Task> tasks = {compute(0, 500.0), compute(1, 250.0, {0}),
                             comm(2, 0, 1, 1.25e6, {0, 1}, {1})};
  SimResult r = simulate(tasks, t, 100.0);
  // 750 us of compute, then 100 us of transfer + 1 us propagation.
  CHECK(r.iteration_time_us == doctest::Approx(851.0));
}

TEST_CASE("switch stars carry traffic at the lane rate with tax 1") {
  Topology star = make_switch_star(4, 4.0);  // 4 lanes of B per server
  std::vector<Task> tasks;
  for (int i = 0; i < 4; ++i) {
    tasks.push_back(comm(i, i, (i + 1) % 4, 5e9));
  }
  SimResult r = simulate(tasks, star, 100.0);
  // 5 GB at 400 Gbps: 100000 us, one logical hop.
  CHECK(r.iteration_time_us == doctest::Approx(100002.0).epsilon(1e-6));
  CHECK(r.bandwidth_tax == doctest::Approx(1.0));
}

TEST_CASE("deterministic across runs") {
  Topology t = line_topology(5);
  std::vector<Task> tasks;
  for (int i = 0; i < 8; ++i) {
    const int src = i % 4;
    const int dst = (src + 1 + i % 3) % 5 == src ? (src + 2) % 5 : (src + 1 + i % 3) % 5;
    tasks.push_back(comm(i, src, dst, 1e7 * (i + 1)));
  }
  SimResult a = simulate(tasks, t, 25.0);
  SimResult b = simulate(tasks, t, 25.0);
  CHECK(a.iteration_time_us == b.iteration_time_us);
  CHECK(a.wire_bytes == b.wire_bytes);
  REQUIRE(a.flows.size() == b.flows.size());
  for (size_t i = 0; i < a.flows.size(); ++i) {
    CHECK(a.flows[i].finish_us == b.flows[i].finish_us);
  }
}

TEST_CASE("unroutable flows raise") {
  Topology t(3, 1);
  t.add_edge(TopoEdge{0, 1, 1, EdgeTag::kFabric});
  CHECK_THROWS_WITH_AS(simulate({comm(0, 0, 2, 1e6)}, t, 100.0),
                       doctest::Contains("unroutable"), Error);
}

TEST_CASE("dependency cycles are rejected") {
  Topology t = line_topology(2);
  std::vector<Task> tasks = {compute(0, 1.0, {1}), compute(1, 1.0, {0})};
  CHECK_THROWS_AS(simulate(tasks, t, 100.0), Error);
}

TEST_CASE("utility follows the exponential discount") {
  TrafficMatrix tm = demand(2, {{0, 1, 10.0}});
  CHECK(reconfig_utility({{{0, 1}, 1}}, tm, ReconfigPolicy::Discount::kExponential) ==
        doctest::Approx(5.0));
  CHECK(reconfig_utility({{{0, 1}, 2}}, tm, ReconfigPolicy::Discount::kExponential) ==
        doctest::Approx(7.5));
  CHECK(reconfig_utility({{{0, 1}, 2}}, tm, ReconfigPolicy::Discount::kUnity) ==
        doctest::Approx(10.0));
}

TEST_CASE("greedy reconfig gives the dominant pair parallel links") {
  TrafficMatrix tm = demand(4, {{0, 1, 100.0}, {2, 3, 40.0}});
  Topology t = ocs_reconfig_step(4, tm, 2, {}, false);
  CHECK(t.edge_multiplicity(0, 1) == 2);
  CHECK(t.edge_multiplicity(2, 3) == 2);
}

TEST_CASE("uniform demand at degree one forms a perfect matching") {
  TrafficMatrix tm;
  tm.n = 6;
  tm.bytes.assign(36, 0.0);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (i != j) tm.at(i, j) = 1.0;
    }
  }
  Topology t = ocs_reconfig_step(6, tm, 1, {}, false);
  for (int v = 0; v < 6; ++v) {
    CHECK(t.out_multiplicity(v) == 1);
    CHECK(t.in_multiplicity(v) == 1);
  }
}

TEST_CASE("zero demand with forwarding yields connectivity-only edges") {
  TrafficMatrix tm = demand(5, {});
  Topology t = ocs_reconfig_step(5, tm, 2, {}, true);
  CHECK(t.strongly_connected());
}

TEST_CASE("seeded current links discount repeated grants") {
  TrafficMatrix tm = demand(4, {{0, 1, 100.0}, {2, 3, 60.0}});
  // Two existing (0,1) links scale its effective demand to 25 < 60.
  Topology t = ocs_reconfig_step(4, tm, 1, {{{0, 1}, 2}}, false);
  CHECK(t.edge_multiplicity(2, 3) == 1);
}

TEST_CASE("reconfig pause accounting and pure-AllReduce recovery") {
  // Ring demand at degree one: the first reconfiguration reproduces the ring
  // and the run completes in transfer time plus one pause.
  std::vector<Task> tasks;
  for (int i = 0; i < 4; ++i) {
    tasks.push_back(comm(i, i, (i + 1) % 4, 1.25e6));
  }
  ReconfigPolicy policy;
  policy.mode = ReconfigPolicy::Mode::kPeriodic;
  policy.interval_us = 50000.0;
  policy.reconfig_latency_us = 10.0;
  policy.forwarding = false;
  SimResult r = simulate_reconfig(tasks, 4, policy, 1, 100.0);
  CHECK(r.reconfig_count == 1);
  CHECK(r.total_pause_us == doctest::Approx(10.0));
  CHECK(r.iteration_time_us == doctest::Approx(10.0 + 100.0 + 1.0));
}

TEST_CASE("longer reconfiguration latency never speeds a run up") {
  std::vector<Task> tasks;
  for (int i = 0; i < 6; ++i) {
    tasks.push_back(comm(i, i, (i + 1) % 6, 6.25e8));
  }
  double prev = 0.0;
  for (double latency : {1.0, 100.0, 10000.0}) {
    ReconfigPolicy policy;
    policy.mode = ReconfigPolicy::Mode::kPeriodic;
    policy.interval_us = 50000.0;
    policy.reconfig_latency_us = latency;
    policy.forwarding = false;
    SimResult r = simulate_reconfig(tasks, 6, policy, 1, 100.0);
    CHECK(r.iteration_time_us >= prev);
    prev = r.iteration_time_us;
  }
}

TEST_CASE("forwarding-off flows stall until a circuit appears") {
  // Degree 1 and two competing sources for one sink: (1,2) waits out the
  // first interval while (0,2)'s bigger transfer holds the rx port.
  std::vector<Task> tasks = {comm(0, 0, 2, 1e9), comm(1, 1, 2, 1e6)};
  ReconfigPolicy policy;
  policy.mode = ReconfigPolicy::Mode::kPeriodic;
  policy.interval_us = 50000.0;
  policy.reconfig_latency_us = 10.0;
  policy.forwarding = false;
  SimResult r = simulate_reconfig(tasks, 3, policy, 1, 100.0);
  CHECK(r.reconfig_count >= 2);
  const FlowRecord* small = nullptr;
  for (const FlowRecord& f : r.flows) {
    if (f.task_id == 1) small = &f;
  }
  REQUIRE(small != nullptr);
  CHECK(small->finish_us > 50000.0);
}

TEST_CASE("forwarding-on reroutes pending flows over relays") {
  // One port per node and three pairwise demands: somebody must relay.
  std::vector<Task> tasks = {comm(0, 0, 1, 2e8), comm(1, 1, 2, 2e8), comm(2, 2, 0, 2e8),
                             comm(3, 0, 2, 1e8)};
  ReconfigPolicy policy;
  policy.mode = ReconfigPolicy::Mode::kPeriodic;
  policy.interval_us = 50000.0;
  policy.reconfig_latency_us = 10.0;
  policy.forwarding = true;
  SimResult r = simulate_reconfig(tasks, 3, policy, 1, 100.0);
  CHECK(r.iteration_time_us > 0.0);
  CHECK(r.bandwidth_tax >= 1.0);
  CHECK(r.flows.size() == 4);
}

TEST_CASE("metrics summarize path lengths and link loads") {
  Topology t = line_topology(3);
  SimResult r = simulate({comm(0, 0, 2, 1e8, {0, 1, 2})}, t, 100.0);
  Metrics m = compute_metrics(r, t);
  CHECK(m.bandwidth_tax == doctest::Approx(2.0));
  // Line 0-1-2 both directions: distances 1,1,1,1,2,2.
  CHECK(m.mean_path_length == doctest::Approx(8.0 / 6.0));
  CHECK(m.link_load_cdf.size() == 2);
}

TEST_CASE("max-min drain schedule: freed capacity is re-shared immediately") {
  // Three flows of 100/200/300 MB over one 100 Gbps link: each runs at B/3
  // until the smallest drains, then B/2, then B.
  Topology t = line_topology(2);
  std::vector<Task> tasks = {comm(0, 0, 1, 1e8, {0, 1}), comm(1, 0, 1, 2e8, {0, 1}),
                             comm(2, 0, 1, 3e8, {0, 1})};
  SimResult r = simulate(tasks, t, 100.0);
  REQUIRE(r.flows.size() == 3);
  std::map<int, double> finish;
  for (const FlowRecord& f : r.flows) finish[f.task_id] = f.finish_us;
  CHECK(finish[0] == doctest::Approx(24000.0 + 1.0));
  CHECK(finish[1] == doctest::Approx(40000.0 + 1.0));
  CHECK(finish[2] == doctest::Approx(48000.0 + 1.0));
}
