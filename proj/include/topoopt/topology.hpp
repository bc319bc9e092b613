#ifndef TOPOOPT_TOPOLOGY_HPP
#define TOPOOPT_TOPOLOGY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "topoopt/workload.hpp"

namespace topoopt {

enum class EdgeTag { kAllReduce, kMp, kFabric };

struct TopoEdge {
  int src = 0;
  int dst = 0;
  int multiplicity = 1;
  EdgeTag tag = EdgeTag::kAllReduce;
  int group = -1;                // AllReduce group id, -1 otherwise
  int stride = 0;                // originating stride for ring edges
  double capacity_factor = 1.0;  // link capacity = multiplicity * factor * B
};

// Degree-capped directed multigraph over servers, optionally with switch
// nodes for the electrically switched baselines. Servers occupy ids
// [0, num_servers); anything above is a switch.
class Topology {
 public:
  Topology() = default;
  Topology(int num_servers, int degree_cap, int num_switch_nodes = 0);

  int num_nodes() const { return num_servers_ + num_switches_; }
  int num_servers() const { return num_servers_; }
  int degree_cap() const { return degree_cap_; }
  bool is_server(int node) const { return node < num_servers_; }

  // Adds (merging multiplicities for identical src/dst/tag/group/stride).
  void add_edge(const TopoEdge& e);
  const std::vector<TopoEdge>& edges() const { return edges_; }

  int out_multiplicity(int node) const;
  int in_multiplicity(int node) const;
  bool has_edge(int src, int dst) const;
  int edge_multiplicity(int src, int dst) const;

  // Throws if any server exceeds its tx or rx port budget.
  void validate_degree() const;

  // Successor lists over all nodes (each distinct (src,dst) once).
  const std::vector<std::vector<int>>& adjacency() const;

  // Logical server-level adjacency: v is a logical neighbor of u when u
  // reaches v through switch nodes only. For all-server topologies this is
  // the plain adjacency.
  std::vector<std::vector<int>> server_adjacency() const;

  // Directed server-hop distances from src to every server (-1 unreachable).
  std::vector<int> server_distances(int src) const;

  bool strongly_connected() const;

 private:
  int num_servers_ = 0;
  int num_switches_ = 0;
  int degree_cap_ = 0;
  std::vector<TopoEdge> edges_;
  mutable std::vector<std::vector<int>> adj_cache_;
  mutable bool adj_dirty_ = true;
  mutable std::vector<std::vector<int>> server_adj_cache_;
  mutable bool server_adj_dirty_ = true;
};

struct DegreeSplit {
  int allreduce_degree = 0;  // d_A
  int mp_degree = 0;         // d_MP
};

// d_A = max(1, ceil(d * T_AR / (T_AR + T_MP))), remainder to MP.
DegreeSplit split_degree(int d, double allreduce_total_bytes, double mp_total_bytes);

// AllReduce sub-topology: groups by descending traffic, per-group degree
// d_k = ceil(d_A * T_k / T_total) capped at the remaining budget, one ring
// per selected stride.
Topology build_allreduce_subtopo(int n, int allreduce_degree,
                                 const std::vector<AllReduceGroup>& groups,
                                 bool prime_only = false);

// MP sub-topology: repeated maximum weight matching over the (symmetrized)
// demand, halving matched pair demand after every round; each matched pair
// gains one duplex link.
Topology build_mp_subtopo(int n, int mp_degree, const TrafficMatrix& mp_demand);

// Union of edge sets; degree re-validated.
Topology merge_topologies(const Topology& a, const Topology& b);

// Max over ordered server pairs of the shortest directed hop distance.
// Throws (naming a witness pair) when disconnected.
int diameter(const Topology& t);

// Uniform random d-regular multigraph (no self loops) under a fixed seed.
Topology make_expander(int n, int d, uint64_t seed);

// Single non-blocking switch: per-server duplex uplink of
// `per_server_capacity_factor` * B, with an optional core stage capped at
// `core_capacity_factor` * B (pass <= 0 for a non-blocking core).
Topology make_switch_star(int n, double per_server_capacity_factor,
                          double core_capacity_factor = 0.0);

}  // namespace topoopt

#endif  // TOPOOPT_TOPOLOGY_HPP
