#include "topoopt/altopt.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "topoopt/error.hpp"

namespace topoopt {

void SearchConfig::validate() const {
  require(mcmc_budget >= 1, "SearchConfig: budget must be positive");
  require(alt_rounds >= 1, "SearchConfig: alt_rounds must be positive");
  require(temp_decay > 0.0 && temp_decay <= 1.0, "SearchConfig: decay must be in (0, 1]");
  require(convergence_epsilon > 0.0, "SearchConfig: epsilon must be positive");
}

std::vector<Task> build_task_graph(const JobSpec& job, const ParallelStrategy& strategy,
                                   const Topology& topology, const RoutingTable& routes,
                                   bool overlap, bool static_paths, bool ring_steps) {
  job.validate();
  strategy.validate(job);
  const TransferSet ts = derive_transfers(job, strategy);

  std::vector<Task> tasks;
  auto add = [&](Task t) {
    const int id = static_cast<int>(tasks.size());
    t.id = id;
    tasks.push_back(std::move(t));
    return id;
  };

  // Per-layer compute chain.
  std::vector<int> layer_task(job.layers.size(), -1);
  int prev = -1;
  for (size_t l = 0; l < job.layers.size(); ++l) {
    Task t;
    t.kind = Task::Kind::kCompute;
    t.duration_us = job.layers[l].fwd_compute_us + job.layers[l].bwd_compute_us;
    if (prev >= 0) t.deps.push_back(prev);
    prev = add(t);
    layer_task[l] = prev;
  }
  const int last_compute = prev;

  // Map a replica set back to its originating layers so the overlap mode can
  // anchor a group's synchronization on the layer that produced it.
  std::map<std::vector<int>, int> group_anchor;
  if (overlap) {
    for (size_t l = 0; l < job.layers.size(); ++l) {
      const LayerAssignment& a = strategy.assignments[l];
      if (!a.replicated) continue;
      std::vector<int> members = a.servers;
      std::sort(members.begin(), members.end());
      group_anchor[members] = layer_task[l];
    }
  }

  auto resolve_path = [&](int src, int dst) -> std::vector<int> {
    if (!static_paths) return {};
    if (const std::vector<int>* p = routes.find_path(src, dst)) return *p;
    return shortest_paths_pair(topology, src, dst, 1).front();
  };

  // AllReduce flows: each member pushes its ring volume to its successors,
  // split evenly over the group's selected strides.
  for (const AllReduceGroup& g : ts.allreduce_groups) {
    const int k = static_cast<int>(g.members.size());
    std::vector<int> strides;
    for (const TopoEdge& e : topology.edges()) {
      if (e.tag == EdgeTag::kAllReduce && e.group == g.id) strides.push_back(e.stride);
    }
    std::sort(strides.begin(), strides.end());
    strides.erase(std::unique(strides.begin(), strides.end()), strides.end());
    if (strides.empty()) strides.push_back(0);  // route on the general fabric

    const double per_stride = g.ring_volume_per_member() / strides.size();
    int dep = last_compute;
    if (overlap) {
      auto it = group_anchor.find(g.members);
      if (it != group_anchor.end()) dep = it->second;
    }
    for (int p : strides) {
      auto make_flow = [&](int i, double bytes) {
        Task t;
        t.kind = Task::Kind::kComm;
        t.src = g.members[i];
        const int succ = p > 0 ? g.members[(i + p) % k] : g.members[(i + 1) % k];
        t.dst = succ;
        t.bytes = bytes;
        if (p > 0) {
          t.path = {t.src, t.dst};  // ring edges are direct by construction
        } else if (static_paths) {
          t.path = resolve_path(t.src, t.dst);
        }
        return t;
      };
      if (!ring_steps) {
        for (int i = 0; i < k; ++i) {
          Task t = make_flow(i, per_stride);
          if (dep >= 0) t.deps.push_back(dep);
          add(t);
        }
        continue;
      }
      // Chunked schedule: 2(k-1) steps of S/k bytes; each member's step
      // waits for the chunk arriving from its ring predecessor.
      const int steps = 2 * (k - 1);
      const double chunk = per_stride / steps;
      std::vector<int> prev_step(k, dep);
      for (int step = 0; step < steps; ++step) {
        std::vector<int> this_step(k, -1);
        for (int i = 0; i < k; ++i) {
          Task t = make_flow(i, chunk);
          const int eff = p > 0 ? p : 1;
          const int pred = ((i - eff) % k + k) % k;
          if (step == 0) {
            if (dep >= 0) t.deps.push_back(dep);
          } else {
            t.deps.push_back(prev_step[pred]);
          }
          this_step[i] = add(t);
        }
        prev_step = this_step;
      }
    }
  }

  // MP flows along their routed paths.
  for (const MpTransfer& m : ts.mp_transfers) {
    Task t;
    t.kind = Task::Kind::kComm;
    t.src = m.src;
    t.dst = m.dst;
    t.bytes = m.bytes;
    if (static_paths) t.path = resolve_path(m.src, m.dst);
    if (last_compute >= 0) t.deps.push_back(last_compute);
    add(t);
  }
  return tasks;
}

double estimate_iteration_time(const JobSpec& job, const ParallelStrategy& strategy,
                               const Topology& topology, const RoutingTable& routes,
                               double link_bandwidth_gbps) {
  require(topology.strongly_connected(), "estimate_iteration_time: topology disconnected");
  const std::vector<Task> tasks = build_task_graph(job, strategy, topology, routes);
  return simulate(tasks, topology, link_bandwidth_gbps).iteration_time_us;
}

namespace {

// One per-layer placement choice in the coarse strategy space.
struct Choice {
  bool replicated = true;
  int shards = 0;  // power of two, for partitioned layers

  LayerAssignment materialize(int n) const {
    LayerAssignment a;
    a.replicated = replicated;
    if (replicated) {
      a.servers.resize(n);
      for (int i = 0; i < n; ++i) a.servers[i] = i;
    } else {
      a.servers.resize(shards);
      for (int j = 0; j < shards; ++j) {
        a.servers[j] = static_cast<int>(static_cast<long long>(j) * n / shards);
      }
    }
    return a;
  }

  std::string describe() const {
    return replicated ? "replicate" : "partition/" + std::to_string(shards);
  }
};

std::vector<Choice> choice_space(int n) {
  std::vector<Choice> out;
  out.push_back(Choice{true, 0});
  for (int s = 2; s <= n; s *= 2) out.push_back(Choice{false, s});
  return out;
}

}  // namespace

McmcResult mcmc_search(const JobSpec& job, const Topology& topology, const RoutingTable& routes,
                       double link_bandwidth_gbps, const SearchConfig& cfg,
                       const ParallelStrategy& initial) {
  cfg.validate();
  require(topology.strongly_connected(), "mcmc_search: topology disconnected");
  const int n = job.num_servers;
  const std::vector<Choice> space = choice_space(n);
  std::mt19937_64 rng(cfg.seed);

  ParallelStrategy current = initial;
  double current_cost =
      estimate_iteration_time(job, current, topology, routes, link_bandwidth_gbps);

  McmcResult result;
  result.strategy = current;
  result.best_cost_us = current_cost;

  double temperature = std::max(1e-9, cfg.initial_temp_fraction * current_cost);
  std::uniform_int_distribution<int> layer_dist(0, static_cast<int>(job.layers.size()) - 1);
  std::uniform_int_distribution<int> choice_dist(0, static_cast<int>(space.size()) - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto same_assignment = [](const LayerAssignment& a, const LayerAssignment& b) {
    return a.replicated == b.replicated && a.servers == b.servers;
  };

  for (int i = 0; i < cfg.mcmc_budget; ++i) {
    const int layer = layer_dist(rng);
    LayerAssignment next;
    std::string label;
    for (size_t attempt = 0; attempt < space.size(); ++attempt) {
      const Choice& pick = space[choice_dist(rng)];
      next = pick.materialize(n);
      label = pick.describe();
      if (!same_assignment(next, current.assignments[layer])) break;
    }
    if (same_assignment(next, current.assignments[layer])) {
      temperature *= cfg.temp_decay;
      continue;  // layer has no alternative in the space
    }
    ParallelStrategy proposal = current;
    proposal.assignments[layer] = std::move(next);

    const double cost =
        estimate_iteration_time(job, proposal, topology, routes, link_bandwidth_gbps);
    const double delta = cost - current_cost;
    bool accept = delta < 0.0;
    if (!accept) {
      accept = unit(rng) < std::exp(-delta / temperature);
    }
    if (accept) {
      current = std::move(proposal);
      current_cost = cost;
      result.accepted.push_back(AcceptedProposal{i, layer, label, cost});
      if (cost < result.best_cost_us) {
        result.best_cost_us = cost;
        result.strategy = current;
      }
    }
    temperature *= cfg.temp_decay;
  }
  return result;
}

OptResult alternate_optimize(const JobSpec& job, int n, int d, double link_bandwidth_gbps,
                             const SearchConfig& cfg) {
  cfg.validate();
  require(n == job.num_servers, "alternate_optimize: job sized for a different cluster");
  require(n >= 1 && d >= 1, "alternate_optimize: bad cluster shape");

  OptResult out;
  out.strategy = ParallelStrategy::pure_data_parallel(job);
  {
    const TransferSet ts = derive_transfers(job, out.strategy);
    FinderResult fr = topology_finder(n, d, ts);
    out.topology = std::move(fr.topology);
    out.routes = std::move(fr.routes);
    out.split = fr.split;
  }
  out.best_iteration_us =
      estimate_iteration_time(job, out.strategy, out.topology, out.routes, link_bandwidth_gbps);

  ParallelStrategy warm = out.strategy;
  double prev_best = out.best_iteration_us;
  for (int round = 1; round <= cfg.alt_rounds; ++round) {
    SearchConfig round_cfg = cfg;
    round_cfg.seed = cfg.seed + static_cast<uint64_t>(round - 1);
    McmcResult mc =
        mcmc_search(job, out.topology, out.routes, link_bandwidth_gbps, round_cfg, warm);
    for (const AcceptedProposal& a : mc.accepted) out.accepted_log.push_back(a);
    warm = mc.strategy;

    if (mc.best_cost_us < out.best_iteration_us) {
      out.strategy = mc.strategy;
      out.best_iteration_us = mc.best_cost_us;
    }

    // Rebuild the topology for the improved strategy and keep it when the
    // combined pair evaluates at least as well.
    const TransferSet ts = derive_transfers(job, mc.strategy);
    FinderResult fr = topology_finder(n, d, ts);
    const double rebuilt =
        estimate_iteration_time(job, mc.strategy, fr.topology, fr.routes, link_bandwidth_gbps);
    if (rebuilt <= out.best_iteration_us) {
      out.strategy = mc.strategy;
      out.topology = std::move(fr.topology);
      out.routes = std::move(fr.routes);
      out.split = fr.split;
      out.best_iteration_us = rebuilt;
    }

    out.rounds.push_back(RoundRecord{round, out.best_iteration_us});
    const double improvement = (prev_best - out.best_iteration_us) / prev_best;
    if (round > 1 && improvement < cfg.convergence_epsilon) break;
    prev_best = out.best_iteration_us;
  }
  return out;
}

double analytic_iteration_time(double allreduce_bytes, double alltoall_bytes, double n,
                               double bandwidth, double alpha, double compute_time) {
  require(allreduce_bytes >= 0.0 && alltoall_bytes >= 0.0 && n >= 0.0 && alpha >= 0.0 &&
              compute_time >= 0.0,
          "analytic_iteration_time: negative input");
  require(n * bandwidth > 0.0, "analytic_iteration_time: zero aggregate bandwidth");
  return allreduce_bytes / (n * bandwidth) + alpha * alltoall_bytes / (n * bandwidth) +
         compute_time;
}

MultiJobResult multi_job_run(const std::vector<MultiJobRequest>& jobs, int total_servers, int d,
                             double link_bandwidth_gbps) {
  long long requested = 0;
  for (const MultiJobRequest& r : jobs) {
    require(r.servers == r.job.num_servers, "multi_job_run: shard size mismatch");
    requested += r.servers;
  }
  require(requested <= total_servers,
          "multi_job_run: admission error, requested " + std::to_string(requested) +
              " servers of " + std::to_string(total_servers));

  MultiJobResult out;
  for (const MultiJobRequest& r : jobs) {
    OptResult opt =
        alternate_optimize(r.job, r.job.num_servers, d, link_bandwidth_gbps, r.search);
    const std::vector<Task> tasks =
        build_task_graph(r.job, opt.strategy, opt.topology, opt.routes);
    SimResult sim = simulate(tasks, opt.topology, link_bandwidth_gbps);
    out.iteration_times_us.push_back(sim.iteration_time_us);
    out.per_job.push_back(std::move(sim));
  }
  if (!out.iteration_times_us.empty()) {
    std::vector<double> sorted = out.iteration_times_us;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double t : sorted) sum += t;
    out.mean_iteration_us = sum / sorted.size();
    const size_t idx =
        std::min(sorted.size() - 1, static_cast<size_t>(std::ceil(0.99 * sorted.size())) - 1);
    out.p99_iteration_us = sorted[idx];
  }
  return out;
}

}  // namespace topoopt
