#ifndef TOPOOPT_ALTOPT_HPP
#define TOPOOPT_ALTOPT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "topoopt/routing.hpp"
#include "topoopt/simulator.hpp"
#include "topoopt/workload.hpp"

namespace topoopt {

struct SearchConfig {
  int mcmc_budget = 500;            // proposals per search pass
  double initial_temp_fraction = 0.05;  // T0 as a fraction of the starting cost
  double temp_decay = 0.99;         // per proposal
  int alt_rounds = 3;               // k
  double convergence_epsilon = 0.01;
  uint64_t seed = 1;

  void validate() const;
};

struct AcceptedProposal {
  int proposal_index = 0;
  int layer = 0;
  std::string choice;
  double cost_us = 0.0;
};

struct McmcResult {
  ParallelStrategy strategy;
  double best_cost_us = 0.0;
  std::vector<AcceptedProposal> accepted;
};

struct RoundRecord {
  int round = 0;
  double best_iteration_us = 0.0;
};

struct OptResult {
  ParallelStrategy strategy;
  Topology topology{1, 1};
  RoutingTable routes;
  DegreeSplit split;
  std::vector<RoundRecord> rounds;       // best-seen per round, non-increasing
  std::vector<AcceptedProposal> accepted_log;
  double best_iteration_us = 0.0;
};

// Task graph for one training iteration: a chain of per-layer compute tasks
// followed by the derived communication (layer-overlapped when `overlap`).
// Comm tasks carry explicit paths when the routing table (or the topology)
// resolves them; otherwise the simulator routes at start time. With
// `ring_steps` each ring synchronization expands into its 2(k-1) chunked
// steps with member-to-member dependencies instead of one bulk flow.
std::vector<Task> build_task_graph(const JobSpec& job, const ParallelStrategy& strategy,
                                   const Topology& topology, const RoutingTable& routes,
                                   bool overlap = false, bool static_paths = true,
                                   bool ring_steps = false);

// Simulated iteration time of a (strategy, topology) pair.
double estimate_iteration_time(const JobSpec& job, const ParallelStrategy& strategy,
                               const Topology& topology, const RoutingTable& routes,
                               double link_bandwidth_gbps);

// MCMC over the per-layer replicate-vs-partition space on a fixed topology.
// Proposals re-assign one random layer; accepts follow the Metropolis rule
// with a geometric temperature schedule. Returns the best-seen strategy.
McmcResult mcmc_search(const JobSpec& job, const Topology& topology, const RoutingTable& routes,
                       double link_bandwidth_gbps, const SearchConfig& cfg,
                       const ParallelStrategy& initial);

// Alternating optimization: MCMC pass, then TopologyFinder on the improved
// strategy's demand, then back, for up to alt_rounds or until the relative
// improvement drops below epsilon. alt_rounds == 1 is the sequential
// one-pass baseline.
OptResult alternate_optimize(const JobSpec& job, int n, int d, double link_bandwidth_gbps,
                             const SearchConfig& cfg);

// T = R/(nB) + alpha*A/(nB) + C, the closed-form all-to-all slowdown model.
double analytic_iteration_time(double allreduce_bytes, double alltoall_bytes, double n,
                               double bandwidth, double alpha, double compute_time);

struct MultiJobRequest {
  JobSpec job;
  int servers = 0;
  SearchConfig search;
};

struct MultiJobResult {
  std::vector<SimResult> per_job;
  std::vector<double> iteration_times_us;
  double mean_iteration_us = 0.0;
  double p99_iteration_us = 0.0;
};

// Shards the cluster into disjoint server blocks, one per job, and runs
// alternate_optimize + simulate independently inside each shard.
MultiJobResult multi_job_run(const std::vector<MultiJobRequest>& jobs, int total_servers, int d,
                             double link_bandwidth_gbps);

}  // namespace topoopt

#endif  // TOPOOPT_ALTOPT_HPP
