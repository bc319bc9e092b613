#ifndef TOPOOPT_SIMULATOR_HPP
#define TOPOOPT_SIMULATOR_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "topoopt/routing.hpp"
#include "topoopt/topology.hpp"
#include "topoopt/workload.hpp"

namespace topoopt {

struct Task {
  enum class Kind { kCompute, kComm };
  int id = 0;
  Kind kind = Kind::kCompute;
  // compute
  double duration_us = 0.0;
  int server = 0;
  // comm
  int src = 0;
  int dst = 0;
  double bytes = 0.0;
  std::vector<int> path;  // explicit node path; empty = route at start time
  std::vector<int> deps;
};

struct ReconfigPolicy {
  enum class Mode { kStatic, kPeriodic };
  enum class Discount { kExponential, kUnity };
  Mode mode = Mode::kStatic;
  double interval_us = 50000.0;         // demand collection period (active time)
  double reconfig_latency_us = 10000.0; // all flows pause while switching
  bool forwarding = true;               // host-based relay between circuits
  Discount discount = Discount::kExponential;

  void validate() const;
};

struct FlowRecord {
  int task_id = 0;
  double start_us = 0.0;
  double finish_us = 0.0;
  double bytes = 0.0;
  int hops = 0;  // logical server hops
};

struct SimResult {
  double iteration_time_us = 0.0;
  double logical_bytes = 0.0;
  double wire_bytes = 0.0;
  double bandwidth_tax = 1.0;
  std::map<std::pair<int, int>, double> link_bytes;  // per directed server link
  std::vector<FlowRecord> flows;
  int reconfig_count = 0;
  double total_pause_us = 0.0;
};

struct Metrics {
  double bandwidth_tax = 1.0;
  double mean_path_length = 0.0;       // all server pairs, BFS hops
  double p99_path_length = 0.0;
  std::vector<int> path_length_histogram;  // index = hops
  std::vector<double> link_load_cdf;       // sorted per-link carried bytes
};

// Flow-level deterministic simulator: ready comm tasks become flows, link
// bandwidth is shared max-min (progressive filling, recomputed at flow
// arrival/completion), a multi-hop flow holds every path link at its
// bottleneck rate, compute tasks run when their dependencies finish.
SimResult simulate(const std::vector<Task>& tasks, const Topology& topology,
                   double link_bandwidth_gbps, double prop_delay_us = 1.0);

// One reconfiguration decision: greedily allocate links to the highest
// unsatisfied demand pairs (halving a pair's demand per granted link), then
// repair connectivity with two-edge replacement when forwarding is on.
// `current_links` seeds the diminishing-return discount.
Topology ocs_reconfig_step(int n, const TrafficMatrix& unsatisfied, int d,
                           const std::map<std::pair<int, int>, int>& current_links,
                           bool ensure_connected,
                           ReconfigPolicy::Discount discount =
                               ReconfigPolicy::Discount::kExponential);

// Utility(G) = sum T(i,j) * Discount(L(i,j)) with Discount(l) = 1 - 2^-l in
// exponential mode and 1 in unity mode.
double reconfig_utility(const std::map<std::pair<int, int>, int>& links,
                        const TrafficMatrix& demand, ReconfigPolicy::Discount discount);

// Periodic-reconfiguration run: every interval of active time, measure the
// remaining demand, rebuild the circuit set, pause all flows for the
// reconfiguration latency, and resume on the new topology.
SimResult simulate_reconfig(const std::vector<Task>& tasks, int n, const ReconfigPolicy& policy,
                            int d, double link_bandwidth_gbps, double prop_delay_us = 1.0);

Metrics compute_metrics(const SimResult& result, const Topology& topology);

// All-pairs server path-length statistics of a topology: mean and histogram
// of BFS hop distances, the input behind the path-length CDF plots.
Metrics topology_path_metrics(const Topology& topology);

}  // namespace topoopt

#endif  // TOPOOPT_SIMULATOR_HPP
