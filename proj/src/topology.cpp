#include "topoopt/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <set>

#include "topoopt/error.hpp"
#include "topoopt/matching.hpp"
#include "topoopt/permutations.hpp"

namespace topoopt {

Topology::Topology(int num_servers, int degree_cap, int num_switch_nodes)
    : num_servers_(num_servers), num_switches_(num_switch_nodes), degree_cap_(degree_cap) {
  require(num_servers >= 1, "Topology: need at least one server");
  require(degree_cap >= 1, "Topology: degree cap must be positive");
}

void Topology::add_edge(const TopoEdge& e) {
  require(e.src != e.dst, "Topology: self loop");
  require(e.src >= 0 && e.src < num_nodes() && e.dst >= 0 && e.dst < num_nodes(),
          "Topology: edge endpoint out of range");
  require(e.multiplicity >= 1, "Topology: multiplicity must be positive");
  for (TopoEdge& existing : edges_) {
    if (existing.src == e.src && existing.dst == e.dst && existing.tag == e.tag &&
        existing.group == e.group && existing.stride == e.stride) {
      existing.multiplicity += e.multiplicity;
      adj_dirty_ = server_adj_dirty_ = true;
      return;
    }
  }
  edges_.push_back(e);
  adj_dirty_ = server_adj_dirty_ = true;
}

int Topology::out_multiplicity(int node) const {
  int m = 0;
  for (const TopoEdge& e : edges_)
    if (e.src == node) m += e.multiplicity;
  return m;
}

int Topology::in_multiplicity(int node) const {
  int m = 0;
  for (const TopoEdge& e : edges_)
    if (e.dst == node) m += e.multiplicity;
  return m;
}

bool Topology::has_edge(int src, int dst) const {
  for (const TopoEdge& e : edges_)
    if (e.src == src && e.dst == dst) return true;
  return false;
}

int Topology::edge_multiplicity(int src, int dst) const {
  int m = 0;
  for (const TopoEdge& e : edges_)
    if (e.src == src && e.dst == dst) m += e.multiplicity;
  return m;
}

void Topology::validate_degree() const {
  std::vector<int> out(num_nodes(), 0), in(num_nodes(), 0);
  for (const TopoEdge& e : edges_) {
    out[e.src] += e.multiplicity;
    in[e.dst] += e.multiplicity;
  }
  for (int v = 0; v < num_servers_; ++v) {
    require(out[v] <= degree_cap_,
            "Topology: server " + std::to_string(v) + " exceeds tx degree");
    require(in[v] <= degree_cap_,
            "Topology: server " + std::to_string(v) + " exceeds rx degree");
  }
}

const std::vector<std::vector<int>>& Topology::adjacency() const {
  if (adj_dirty_) {
    adj_cache_.assign(num_nodes(), {});
    std::set<std::pair<int, int>> seen;
    for (const TopoEdge& e : edges_) {
      if (seen.insert({e.src, e.dst}).second) adj_cache_[e.src].push_back(e.dst);
    }
    for (auto& lst : adj_cache_) std::sort(lst.begin(), lst.end());
    adj_dirty_ = false;
  }
  return adj_cache_;
}

std::vector<std::vector<int>> Topology::server_adjacency() const {
  const auto& adj = adjacency();
  std::vector<std::vector<int>> out(num_servers_);
  for (int s = 0; s < num_servers_; ++s) {
    // Reach servers through switch-only interiors.
    std::set<int> reach;
    std::deque<int> frontier;
    std::vector<bool> visited(num_nodes(), false);
    visited[s] = true;
    for (int nb : adj[s]) {
      if (is_server(nb)) {
        reach.insert(nb);
      } else if (!visited[nb]) {
        visited[nb] = true;
        frontier.push_back(nb);
      }
    }
    while (!frontier.empty()) {
      int u = frontier.front();
      frontier.pop_front();
      for (int nb : adj[u]) {
        if (is_server(nb)) {
          if (nb != s) reach.insert(nb);
        } else if (!visited[nb]) {
          visited[nb] = true;
          frontier.push_back(nb);
        }
      }
    }
    out[s].assign(reach.begin(), reach.end());
  }
  return out;
}

std::vector<int> Topology::server_distances(int src) const {
  if (server_adj_dirty_) {
    server_adj_cache_ = server_adjacency();
    server_adj_dirty_ = false;
  }
  const auto& adj = server_adj_cache_;
  std::vector<int> dist(num_servers_, -1);
  dist[src] = 0;
  std::deque<int> q{src};
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
  return dist;
}

bool Topology::strongly_connected() const {
  for (int s = 0; s < num_servers_; ++s) {
    std::vector<int> d = server_distances(s);
    for (int v = 0; v < num_servers_; ++v)
      if (d[v] < 0) return false;
  }
  return true;
}

DegreeSplit split_degree(int d, double allreduce_total_bytes, double mp_total_bytes) {
  require(d >= 1, "split_degree: degree must be positive");
  require(allreduce_total_bytes >= 0.0 && mp_total_bytes >= 0.0,
          "split_degree: totals must be nonnegative");
  require(allreduce_total_bytes + mp_total_bytes > 0.0,
          "split_degree: both traffic totals are zero");
  const double share = allreduce_total_bytes / (allreduce_total_bytes + mp_total_bytes);
  int d_a = static_cast<int>(std::ceil(static_cast<double>(d) * share));
  d_a = std::max(1, std::min(d, d_a));
  return DegreeSplit{d_a, d - d_a};
}

Topology build_allreduce_subtopo(int n, int allreduce_degree,
                                 const std::vector<AllReduceGroup>& groups,
                                 bool prime_only) {
  require(allreduce_degree >= 1, "build_allreduce_subtopo: need at least one degree");
  Topology topo(n, allreduce_degree);

  std::vector<AllReduceGroup> ordered = groups;
  if (ordered.empty()) {
    // No AllReduce demand: keep the cluster connected with rings over all
    // servers (the degree split always reserves at least one port for this).
    AllReduceGroup g;
    g.id = 0;
    g.members.resize(n);
    std::iota(g.members.begin(), g.members.end(), 0);
    g.bytes_per_member = 1.0;
    ordered.push_back(g);
    if (n == 1) return topo;
  }
  double total = 0.0;
  for (const AllReduceGroup& g : ordered) total += g.total_wire_bytes();
  require(total > 0.0, "build_allreduce_subtopo: zero group traffic");
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const AllReduceGroup& a, const AllReduceGroup& b) {
                     return a.total_wire_bytes() > b.total_wire_bytes();
                   });

  int remaining = allreduce_degree;
  for (const AllReduceGroup& g : ordered) {
    if (remaining <= 0) break;
    const int k = static_cast<int>(g.members.size());
    int d_k = static_cast<int>(
        std::ceil(static_cast<double>(remaining) * g.total_wire_bytes() / total));
    d_k = std::max(1, std::min(d_k, remaining));
    PermSet perms = totient_perms(k, k, prime_only);
    d_k = std::min<int>(d_k, static_cast<int>(perms.strides.size()));
    const std::vector<int> strides = select_permutations(n, d_k, perms);
    for (int p : strides) {
      Permutation ring = ring_from_stride(n, k, Stride{p}, g.members);
      for (const auto& [from, to] : ring.successor) {
        topo.add_edge(TopoEdge{from, to, 1, EdgeTag::kAllReduce, g.id, p});
      }
    }
    remaining -= d_k;
  }
  topo.validate_degree();
  return topo;
}

Topology build_mp_subtopo(int n, int mp_degree, const TrafficMatrix& mp_demand) {
  require(mp_degree >= 0, "build_mp_subtopo: negative degree");
  Topology topo(n, std::max(1, mp_degree));
  if (mp_degree == 0) return topo;
  require(mp_demand.n == n, "build_mp_subtopo: demand size mismatch");

  // Symmetrize once; the matching treats pair demand as undirected weight.
  std::vector<std::vector<double>> residual(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      residual[i][j] = residual[j][i] = mp_demand.at(i, j) + mp_demand.at(j, i);
    }
  }

  for (int round = 0; round < mp_degree; ++round) {
    const std::vector<std::pair<int, int>> matched = max_weight_matching(residual);
    if (matched.empty()) break;
    for (const auto& [a, b] : matched) {
      topo.add_edge(TopoEdge{a, b, 1, EdgeTag::kMp});
      topo.add_edge(TopoEdge{b, a, 1, EdgeTag::kMp});
      residual[a][b] /= 2.0;
      residual[b][a] /= 2.0;
    }
  }
  topo.validate_degree();
  return topo;
}

Topology merge_topologies(const Topology& a, const Topology& b) {
  require(a.num_servers() == b.num_servers(), "merge_topologies: size mismatch");
  Topology out(a.num_servers(), a.degree_cap() + b.degree_cap());
  for (const TopoEdge& e : a.edges()) out.add_edge(e);
  for (const TopoEdge& e : b.edges()) out.add_edge(e);
  out.validate_degree();
  return out;
}

int diameter(const Topology& t) {
  int best = 0;
  for (int s = 0; s < t.num_servers(); ++s) {
    std::vector<int> dist = t.server_distances(s);
    for (int v = 0; v < t.num_servers(); ++v) {
      if (dist[v] < 0) {
        throw Error("diameter: disconnected pair (" + std::to_string(s) + ", " +
                    std::to_string(v) + ")");
      }
      best = std::max(best, dist[v]);
    }
  }
  return best;
}

Topology make_expander(int n, int d, uint64_t seed) {
  require(n >= 2, "make_expander: need at least 2 servers");
  require(d >= 1, "make_expander: degree must be positive");
  std::mt19937_64 rng(seed);
  // Configuration-model pairing over d stubs per node, re-drawn until no
  // self loops remain.
  std::vector<int> stubs;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    stubs.clear();
    for (int v = 0; v < n; ++v)
      for (int i = 0; i < d; ++i) stubs.push_back(v);
    std::shuffle(stubs.begin(), stubs.end(), rng);
    bool ok = true;
    for (size_t i = 0; i + 1 < stubs.size(); i += 2) {
      if (stubs[i] == stubs[i + 1]) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    Topology topo(n, d);
    for (size_t i = 0; i + 1 < stubs.size(); i += 2) {
      topo.add_edge(TopoEdge{stubs[i], stubs[i + 1], 1, EdgeTag::kFabric});
      topo.add_edge(TopoEdge{stubs[i + 1], stubs[i], 1, EdgeTag::kFabric});
    }
    topo.validate_degree();
    if (topo.strongly_connected()) return topo;
  }
  throw Error("make_expander: failed to draw a connected pairing");
}

Topology make_switch_star(int n, double per_server_capacity_factor,
                          double core_capacity_factor) {
  require(n >= 1, "make_switch_star: need at least one server");
  require(per_server_capacity_factor > 0.0, "make_switch_star: capacity must be positive");
  const bool core = core_capacity_factor > 0.0;
  Topology topo(n, 1, core ? 2 : 1);
  const int sw_in = n;
  const int sw_out = core ? n + 1 : n;
  for (int v = 0; v < n; ++v) {
    topo.add_edge(TopoEdge{v, sw_in, 1, EdgeTag::kFabric, -1, 0, per_server_capacity_factor});
    topo.add_edge(TopoEdge{sw_out, v, 1, EdgeTag::kFabric, -1, 0, per_server_capacity_factor});
  }
  if (core) {
    topo.add_edge(TopoEdge{sw_in, sw_out, 1, EdgeTag::kFabric, -1, 0, core_capacity_factor});
  }
  return topo;
}

}  // namespace topoopt
