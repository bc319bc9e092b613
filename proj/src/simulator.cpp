#include "topoopt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <set>

#include "topoopt/error.hpp"

namespace topoopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kByteEps = 1e-6;
constexpr double kTimeEps = 1e-9;
// Coarser slack for boundary bookkeeping: absolute deltas below this cannot
// advance `now_ + dt` at realistic magnitudes and would spin the loop.
constexpr double kBoundaryEps = 1e-6;

double gbps_to_bytes_per_us(double gbps) { return gbps * 125.0; }

int server_hops(const Topology& topo, const std::vector<int>& path) {
  int servers = 0;
  for (int v : path)
    if (topo.is_server(v)) ++servers;
  return std::max(0, servers - 1);
}

// Lexicographically smallest shortest node path, or empty when unreachable.
std::vector<int> bfs_path(const Topology& topo, int src, int dst) {
  const auto& adj = topo.adjacency();
  std::vector<int> dist(topo.num_nodes(), -1);
  std::deque<int> q{src};
  dist[src] = 0;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (int v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
    }
  }
  if (dist[dst] < 0) return {};
  std::vector<int> rpath{dst};
  int cur = dst;
  while (cur != src) {
    // smallest predecessor on a shortest path
    int pick = -1;
    for (int u = 0; u < topo.num_nodes(); ++u) {
      if (dist[u] == dist[cur] - 1) {
        const auto& nbrs = adj[u];
        if (std::binary_search(nbrs.begin(), nbrs.end(), cur)) {
          pick = u;
          break;
        }
      }
    }
    require(pick >= 0, "bfs_path: back-trace failed");
    rpath.push_back(pick);
    cur = pick;
  }
  std::reverse(rpath.begin(), rpath.end());
  return rpath;
}

struct LinkTable {
  std::map<std::pair<int, int>, int> index;
  std::vector<double> capacity;  // bytes/us
  std::vector<std::pair<int, int>> key;

  static LinkTable build(const Topology& topo, double bandwidth_gbps) {
    LinkTable t;
    for (const TopoEdge& e : topo.edges()) {
      auto k = std::make_pair(e.src, e.dst);
      double cap = e.multiplicity * e.capacity_factor * gbps_to_bytes_per_us(bandwidth_gbps);
      auto it = t.index.find(k);
      if (it == t.index.end()) {
        t.index[k] = static_cast<int>(t.capacity.size());
        t.capacity.push_back(cap);
        t.key.push_back(k);
      } else {
        t.capacity[it->second] += cap;
      }
    }
    return t;
  }
};

struct Flow {
  int task_id = 0;
  double remaining = 0.0;
  double rate = 0.0;
  std::vector<int> path;
  std::vector<int> links;  // indices into LinkTable
  int hops = 0;
  double start_us = 0.0;
  bool blocked = false;  // no usable route under the current circuits
};

// Progressive filling: repeatedly saturate the tightest link and freeze the
// flows crossing it at the fair share.
void recompute_rates(std::vector<Flow>& flows, const LinkTable& links) {
  const size_t nl = links.capacity.size();
  std::vector<double> cap(links.capacity);
  std::vector<int> count(nl, 0);
  std::vector<char> frozen(flows.size(), 0);
  int unfrozen = 0;
  for (size_t f = 0; f < flows.size(); ++f) {
    if (flows[f].blocked) {
      frozen[f] = 1;
      flows[f].rate = 0.0;
      continue;
    }
    ++unfrozen;
    for (int l : flows[f].links) ++count[l];
  }
  while (unfrozen > 0) {
    int bottleneck = -1;
    double share = kInf;
    for (size_t l = 0; l < nl; ++l) {
      if (count[l] > 0) {
        double s = cap[l] / count[l];
        if (s < share - kTimeEps) {
          share = s;
          bottleneck = static_cast<int>(l);
        }
      }
    }
    require(bottleneck >= 0, "recompute_rates: flow without links");
    for (size_t f = 0; f < flows.size(); ++f) {
      if (frozen[f]) continue;
      bool on = std::find(flows[f].links.begin(), flows[f].links.end(), bottleneck) !=
                flows[f].links.end();
      if (!on) continue;
      flows[f].rate = share;
      frozen[f] = 1;
      --unfrozen;
      for (int l : flows[f].links) {
        cap[l] -= share;
        if (cap[l] < 0.0) cap[l] = 0.0;
        --count[l];
      }
    }
  }
}

struct EngineConfig {
  bool periodic = false;
  ReconfigPolicy policy;
  int degree = 0;
};

class Engine {
 public:
  Engine(const std::vector<Task>& tasks, const Topology& topology, double bandwidth_gbps,
         double prop_delay_us, const EngineConfig& cfg)
      : tasks_(tasks),
        topo_(topology),
        bandwidth_(bandwidth_gbps),
        prop_delay_(prop_delay_us),
        cfg_(cfg) {
    require(bandwidth_gbps > 0.0, "simulate: bandwidth must be positive");
    links_ = LinkTable::build(topo_, bandwidth_);
  }

  SimResult run() {
    validate_dag();
    pending_.assign(tasks_.size(), 0);
    dependents_.assign(tasks_.size(), {});
    done_.assign(tasks_.size(), false);
    for (size_t i = 0; i < tasks_.size(); ++i) {
      pending_[i] = static_cast<int>(tasks_[i].deps.size());
      for (int d : tasks_[i].deps) dependents_[d].push_back(static_cast<int>(i));
    }

    if (cfg_.periodic) {
      // First circuit set comes from the initial demand, before any flow
      // transmits.
      do_reconfig(0.0, initial_demand());
    }

    for (size_t i = 0; i < tasks_.size(); ++i) {
      if (pending_[i] == 0) start_task(static_cast<int>(i), now_);
    }
    if (rates_dirty_) {
      recompute_rates(flows_, links_);
      rates_dirty_ = false;
    }

    size_t completed = 0;
    while (completed < tasks_.size()) {
      double next_timer = timers_.empty() ? kInf : timers_.top().time;
      double drain = next_drain();
      double boundary = next_boundary_time();
      double t_next = std::min({next_timer, drain, boundary});
      require(t_next < kInf, "simulate: deadlock, no runnable work (unroutable flow?)");
      advance_to(t_next);

      // Drained flows hand their completion to a delivery timer. This runs
      // before any boundary handling: a flow that finished its bytes by the
      // reconfiguration instant is complete, not re-routed.
      for (size_t f = 0; f < flows_.size();) {
        const double drain_eps = kByteEps + 1e-12 * tasks_[flows_[f].task_id].bytes;
        if (flows_[f].remaining <= drain_eps) {
          Timer t;
          t.time = now_ + prop_delay_ * std::max<size_t>(1, flows_[f].path.size() - 1);
          t.seq = seq_++;
          t.kind = Timer::kDeliver;
          t.task_id = flows_[f].task_id;
          FlowRecord rec;
          rec.task_id = flows_[f].task_id;
          rec.start_us = flows_[f].start_us;
          rec.finish_us = t.time;
          rec.bytes = tasks_[flows_[f].task_id].bytes;
          rec.hops = flows_[f].hops;
          result_.flows.push_back(rec);
          timers_.push(t);
          flows_.erase(flows_.begin() + f);
          rates_dirty_ = true;
        } else {
          ++f;
        }
      }

      // Reconfiguration boundary.
      if (cfg_.periodic && !paused_ &&
          active_elapsed_ + kBoundaryEps >= next_boundary_active_) {
        do_reconfig(now_, current_demand());
      }

      while (!timers_.empty() && timers_.top().time <= now_ + kTimeEps) {
        Timer t = timers_.top();
        timers_.pop();
        switch (t.kind) {
          case Timer::kComputeDone:
          case Timer::kDeliver:
            if (!done_[t.task_id]) {
              done_[t.task_id] = true;
              ++completed;
              result_.iteration_time_us = std::max(result_.iteration_time_us, now_);
              for (int dep : dependents_[t.task_id]) {
                if (--pending_[dep] == 0) start_task(dep, now_);
              }
            }
            break;
          case Timer::kPauseEnd:
            paused_ = false;
            rates_dirty_ = true;
            break;
        }
      }

      if (rates_dirty_) {
        recompute_rates(flows_, links_);
        rates_dirty_ = false;
      }
    }

    result_.bandwidth_tax =
        result_.logical_bytes > 0.0 ? result_.wire_bytes / result_.logical_bytes : 1.0;
    return result_;
  }

 private:
  struct Timer {
    double time = 0.0;
    uint64_t seq = 0;
    enum Kind { kComputeDone, kDeliver, kPauseEnd } kind = kComputeDone;
    int task_id = -1;
    bool operator>(const Timer& o) const {
      if (time != o.time) return time > o.time;
      return seq > o.seq;
    }
  };

  void validate_dag() const {
    std::vector<int> indeg(tasks_.size(), 0);
    for (size_t i = 0; i < tasks_.size(); ++i) {
      require(tasks_[i].id == static_cast<int>(i), "simulate: task ids must be dense 0..n-1");
      for (int d : tasks_[i].deps) {
        require(d >= 0 && d < static_cast<int>(tasks_.size()), "simulate: bad dependency id");
        ++indeg[i];
      }
    }
    std::deque<int> q;
    for (size_t i = 0; i < tasks_.size(); ++i)
      if (indeg[i] == 0) q.push_back(static_cast<int>(i));
    size_t seen = 0;
    std::vector<std::vector<int>> deps_of(tasks_.size());
    for (size_t i = 0; i < tasks_.size(); ++i)
      for (int d : tasks_[i].deps) deps_of[d].push_back(static_cast<int>(i));
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      ++seen;
      for (int v : deps_of[u])
        if (--indeg[v] == 0) q.push_back(v);
    }
    require(seen == tasks_.size(), "simulate: dependency cycle");
  }

  void start_task(int id, double t) {
    const Task& task = tasks_[id];
    if (task.kind == Task::Kind::kCompute) {
      Timer timer;
      timer.time = t + task.duration_us;
      timer.seq = seq_++;
      timer.kind = Timer::kComputeDone;
      timer.task_id = id;
      timers_.push(timer);
      return;
    }
    require(task.src != task.dst, "simulate: comm task with src == dst");
    Flow f;
    f.task_id = id;
    f.remaining = task.bytes;
    f.start_us = t;
    f.path = task.path;
    route_flow(&f);
    result_.logical_bytes += task.bytes;
    if (f.remaining <= kByteEps) {
      // Zero-byte transfer: deliver after propagation only.
      Timer timer;
      timer.time = t + prop_delay_ * std::max<size_t>(1, f.path.empty() ? 1 : f.path.size() - 1);
      timer.seq = seq_++;
      timer.kind = Timer::kDeliver;
      timer.task_id = id;
      timers_.push(timer);
      return;
    }
    flows_.push_back(std::move(f));
    rates_dirty_ = true;
  }

  // Resolve the path a flow uses under the current topology.
  void route_flow(Flow* f) {
    const Task& task = tasks_[f->task_id];
    std::vector<int> path = f->path;
    if (cfg_.periodic) {
      if (cfg_.policy.forwarding) {
        path = bfs_path(topo_, task.src, task.dst);
      } else {
        path = topo_.has_edge(task.src, task.dst) ? std::vector<int>{task.src, task.dst}
                                                  : std::vector<int>{};
      }
    } else if (path.empty()) {
      path = bfs_path(topo_, task.src, task.dst);
    }
    if (path.empty()) {
      require(cfg_.periodic && !cfg_.policy.forwarding,
              "simulate: unroutable flow " + std::to_string(task.src) + " -> " +
                  std::to_string(task.dst));
      f->blocked = true;
      f->links.clear();
      f->path.clear();
      return;
    }
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      require(topo_.has_edge(path[i], path[i + 1]),
              "simulate: path uses a missing edge " + std::to_string(path[i]) + " -> " +
                  std::to_string(path[i + 1]));
    }
    f->blocked = false;
    f->path = path;
    f->hops = server_hops(topo_, path);
    f->links.clear();
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      f->links.push_back(links_.index.at({path[i], path[i + 1]}));
    }
  }

  double next_drain() const {
    if (paused_) return kInf;
    double best = kInf;
    for (const Flow& f : flows_) {
      if (!f.blocked && f.rate > 0.0) best = std::min(best, now_ + f.remaining / f.rate);
    }
    return best;
  }

  double next_boundary_time() const {
    if (!cfg_.periodic || paused_) return kInf;
    const double remaining = next_boundary_active_ - active_elapsed_;
    return remaining <= kBoundaryEps ? now_ : now_ + remaining;
  }

  void advance_to(double t) {
    const double dt = t - now_;
    if (dt > 0.0 && !paused_) {
      for (Flow& f : flows_) {
        if (f.blocked || f.rate <= 0.0) continue;
        const double moved = std::min(f.remaining, f.rate * dt);
        f.remaining -= moved;
        result_.wire_bytes += moved * f.hops;
        for (size_t i = 0; i + 1 < f.path.size(); ++i) {
          result_.link_bytes[{f.path[i], f.path[i + 1]}] += moved;
        }
      }
      active_elapsed_ += dt;
    }
    now_ = t;
  }

  TrafficMatrix initial_demand() const {
    TrafficMatrix tm;
    tm.n = topo_.num_servers();
    tm.bytes.assign(static_cast<size_t>(tm.n) * tm.n, 0.0);
    for (const Task& t : tasks_) {
      if (t.kind == Task::Kind::kComm) tm.at(t.src, t.dst) += t.bytes;
    }
    return tm;
  }

  TrafficMatrix current_demand() const {
    TrafficMatrix tm;
    tm.n = topo_.num_servers();
    tm.bytes.assign(static_cast<size_t>(tm.n) * tm.n, 0.0);
    for (const Flow& f : flows_) {
      const Task& t = tasks_[f.task_id];
      tm.at(t.src, t.dst) += f.remaining;
    }
    return tm;
  }

  void do_reconfig(double t, const TrafficMatrix& demand) {
    topo_ = ocs_reconfig_step(topo_.num_servers(), demand, cfg_.degree, {},
                              cfg_.policy.forwarding, cfg_.policy.discount);
    links_ = LinkTable::build(topo_, bandwidth_);
    for (Flow& f : flows_) route_flow(&f);
    ++result_.reconfig_count;
    result_.total_pause_us += cfg_.policy.reconfig_latency_us;
    next_boundary_active_ = active_elapsed_ + cfg_.policy.interval_us;
    if (cfg_.policy.reconfig_latency_us > 0.0) {
      paused_ = true;
      Timer timer;
      timer.time = t + cfg_.policy.reconfig_latency_us;
      timer.seq = seq_++;
      timer.kind = Timer::kPauseEnd;
      timers_.push(timer);
    }
    rates_dirty_ = true;
  }

  std::vector<Task> tasks_;
  Topology topo_;
  double bandwidth_ = 0.0;
  double prop_delay_ = 1.0;
  EngineConfig cfg_;
  LinkTable links_;

  std::vector<int> pending_;
  std::vector<std::vector<int>> dependents_;
  std::vector<bool> done_;
  std::vector<Flow> flows_;
  std::priority_queue<Timer, std::vector<Timer>, std::greater<Timer>> timers_;
  double now_ = 0.0;
  double active_elapsed_ = 0.0;
  double next_boundary_active_ = kInf;
  bool paused_ = false;
  bool rates_dirty_ = false;
  uint64_t seq_ = 0;
  SimResult result_;
};

}  // namespace

void ReconfigPolicy::validate() const {
  require(interval_us > reconfig_latency_us, "ReconfigPolicy: interval must exceed latency");
  require(reconfig_latency_us >= 0.0, "ReconfigPolicy: negative latency");
}

SimResult simulate(const std::vector<Task>& tasks, const Topology& topology,
                   double link_bandwidth_gbps, double prop_delay_us) {
  EngineConfig cfg;
  cfg.periodic = false;
  Engine engine(tasks, topology, link_bandwidth_gbps, prop_delay_us, cfg);
  return engine.run();
}

SimResult simulate_reconfig(const std::vector<Task>& tasks, int n, const ReconfigPolicy& policy,
                            int d, double link_bandwidth_gbps, double prop_delay_us) {
  require(policy.mode == ReconfigPolicy::Mode::kPeriodic,
          "simulate_reconfig: policy must be periodic");
  policy.validate();
  EngineConfig cfg;
  cfg.periodic = true;
  cfg.policy = policy;
  cfg.degree = d;
  Topology empty(n, d);
  Engine engine(tasks, empty, link_bandwidth_gbps, prop_delay_us, cfg);
  return engine.run();
}

double reconfig_utility(const std::map<std::pair<int, int>, int>& links,
                        const TrafficMatrix& demand, ReconfigPolicy::Discount discount) {
  double total = 0.0;
  for (const auto& [pair, count] : links) {
    if (count <= 0) continue;
    const double t = demand.at(pair.first, pair.second);
    double disc = 1.0;
    if (discount == ReconfigPolicy::Discount::kExponential) {
      disc = 1.0 - std::pow(2.0, -count);
    }
    total += t * disc;
  }
  return total;
}

namespace {

// Strongly connected component ids over a directed multiset of edges.
std::vector<int> scc_ids(int n, const std::map<std::pair<int, int>, int>& links) {
  std::vector<std::vector<int>> adj(n), radj(n);
  for (const auto& [pair, count] : links) {
    if (count <= 0) continue;
    adj[pair.first].push_back(pair.second);
    radj[pair.second].push_back(pair.first);
  }
  std::vector<int> order;
  std::vector<char> seen(n, 0);
  std::function<void(int)> dfs1 = [&](int u) {
    seen[u] = 1;
    for (int v : adj[u])
      if (!seen[v]) dfs1(v);
    order.push_back(u);
  };
  for (int u = 0; u < n; ++u)
    if (!seen[u]) dfs1(u);
  std::vector<int> comp(n, -1);
  int c = 0;
  std::function<void(int)> dfs2 = [&](int u) {
    comp[u] = c;
    for (int v : radj[u])
      if (comp[v] < 0) dfs2(v);
  };
  for (int i = n - 1; i >= 0; --i) {
    if (comp[order[i]] < 0) {
      dfs2(order[i]);
      ++c;
    }
  }
  return comp;
}

// OWAN-style repair: bridge components with free ports first, then swap the
// endpoints of low-demand edges across components until the graph is
// strongly connected.
void repair_connectivity(int n, std::vector<int>* tx, std::vector<int>* rx,
                         const std::vector<std::vector<double>>& demand,
                         std::map<std::pair<int, int>, int>* links) {
  auto add_link = [&](int a, int b) {
    (*links)[{a, b}] += 1;
    --(*tx)[a];
    --(*rx)[b];
  };
  auto drop_link = [&](int a, int b) {
    auto it = links->find({a, b});
    if (--(it->second) == 0) links->erase(it);
    ++(*tx)[a];
    ++(*rx)[b];
  };
  for (int guard = 0; guard < 4 * n + 8; ++guard) {
    std::vector<int> comp = scc_ids(n, *links);
    int ncomp = 0;
    for (int c : comp) ncomp = std::max(ncomp, c + 1);
    if (ncomp <= 1) return;

    // Free-port bridges: chain the components into a cycle where ports allow.
    bool bridged = false;
    for (int c = 0; c < ncomp; ++c) {
      const int next = (c + 1) % ncomp;
      int a = -1, b = -1;
      for (int v = 0; v < n && a < 0; ++v) {
        if (comp[v] == c && (*tx)[v] > 0) a = v;
      }
      for (int v = 0; v < n && b < 0; ++v) {
        if (comp[v] == next && (*rx)[v] > 0) b = v;
      }
      if (a >= 0 && b >= 0 && a != b) {
        add_link(a, b);
        bridged = true;
      }
    }
    if (bridged) continue;

    // Two-edge replacement: lowest-demand edge in two different components,
    // endpoints swapped to stitch them together.
    std::pair<int, int> e1{-1, -1}, e2{-1, -1};
    double w1 = kInf, w2 = kInf;
    int c1 = -1;
    for (const auto& [pair, count] : *links) {
      if (count <= 0) continue;
      const double w = demand[pair.first][pair.second];
      if (w < w1) {
        w1 = w;
        e1 = pair;
        c1 = comp[pair.first];
      }
    }
    for (const auto& [pair, count] : *links) {
      if (count <= 0 || comp[pair.first] == c1) continue;
      const double w = demand[pair.first][pair.second];
      if (w < w2) {
        w2 = w;
        e2 = pair;
      }
    }
    require(e1.first >= 0 && e2.first >= 0,
            "ocs_reconfig_step: cannot repair connectivity (no swappable edges)");
    drop_link(e1.first, e1.second);
    drop_link(e2.first, e2.second);
    add_link(e1.first, e2.second);
    add_link(e2.first, e1.second);
  }
  throw Error("ocs_reconfig_step: connectivity repair did not converge");
}

}  // namespace

Topology ocs_reconfig_step(int n, const TrafficMatrix& unsatisfied, int d,
                           const std::map<std::pair<int, int>, int>& current_links,
                           bool ensure_connected, ReconfigPolicy::Discount discount) {
  require(d >= 1, "ocs_reconfig_step: degree must be positive");
  require(unsatisfied.n == n, "ocs_reconfig_step: demand size mismatch");

  std::vector<int> tx(n, d), rx(n, d);
  std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double base = unsatisfied.at(i, j);
      auto it = current_links.find({i, j});
      if (it != current_links.end() && it->second > 0) {
        base = discount == ReconfigPolicy::Discount::kExponential
                   ? base * std::pow(2.0, -it->second)
                   : 0.0;
      }
      t[i][j] = base;
    }
  }

  std::map<std::pair<int, int>, int> granted;
  for (;;) {
    int bi = -1, bj = -1;
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      if (tx[i] <= 0) continue;
      for (int j = 0; j < n; ++j) {
        if (i == j || rx[j] <= 0) continue;
        if (t[i][j] > best) {
          best = t[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0) break;
    granted[{bi, bj}] += 1;
    --tx[bi];
    --rx[bj];
    if (discount == ReconfigPolicy::Discount::kExponential) {
      t[bi][bj] /= 2.0;
    } else {
      t[bi][bj] = 0.0;
    }
  }

  if (ensure_connected && n > 1) {
    repair_connectivity(n, &tx, &rx, t, &granted);
  }

  Topology topo(n, d);
  for (const auto& [pair, count] : granted) {
    if (count > 0) topo.add_edge(TopoEdge{pair.first, pair.second, count, EdgeTag::kFabric});
  }
  topo.validate_degree();
  return topo;
}

Metrics compute_metrics(const SimResult& result, const Topology& topology) {
  Metrics m = topology_path_metrics(topology);
  m.bandwidth_tax = result.bandwidth_tax;
  m.link_load_cdf.clear();
  for (const auto& [pair, bytes] : result.link_bytes) m.link_load_cdf.push_back(bytes);
  std::sort(m.link_load_cdf.begin(), m.link_load_cdf.end());
  return m;
}

Metrics topology_path_metrics(const Topology& topology) {
  Metrics m;
  std::vector<int> all;
  for (int s = 0; s < topology.num_servers(); ++s) {
    std::vector<int> dist = topology.server_distances(s);
    for (int v = 0; v < topology.num_servers(); ++v) {
      if (v == s) continue;
      require(dist[v] >= 0, "topology_path_metrics: disconnected pair");
      all.push_back(dist[v]);
      if (dist[v] >= static_cast<int>(m.path_length_histogram.size())) {
        m.path_length_histogram.resize(dist[v] + 1, 0);
      }
      ++m.path_length_histogram[dist[v]];
    }
  }
  if (!all.empty()) {
    double sum = 0.0;
    for (int d : all) sum += d;
    m.mean_path_length = sum / static_cast<double>(all.size());
    std::sort(all.begin(), all.end());
    const size_t idx = std::min(all.size() - 1,
                                static_cast<size_t>(std::ceil(0.99 * all.size())) - 1);
    m.p99_path_length = all[idx];
  }
  return m;
}

}  // namespace topoopt
