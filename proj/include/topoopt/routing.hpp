#ifndef TOPOOPT_ROUTING_HPP
#define TOPOOPT_ROUTING_HPP

#include <map>
#include <vector>

#include "topoopt/topology.hpp"

namespace topoopt {

// Routes for one job: stride sequences per AllReduce group (indexed by rank
// distance within the group) and explicit node paths for MP pairs.
struct RoutingTable {
  // group id -> (rank distance -> ascending stride multiset)
  std::map<int, std::map<int, std::vector<int>>> allreduce_stride_routes;
  // (src, dst) -> up to k loop-free minimum-hop paths, lexicographic order
  std::map<std::pair<int, int>, std::vector<std::vector<int>>> mp_paths;

  const std::vector<int>* find_path(int src, int dst) const {
    auto it = mp_paths.find({src, dst});
    if (it == mp_paths.end() || it->second.empty()) return nullptr;
    return &it->second.front();
  }
};

// Minimum-length coin multisets reaching every residue 1..n-1 under mod-n
// addition. Coins are the selected ring strides. Routes are returned in
// ascending coin order (modular addition commutes). Throws when some
// residue is unreachable.
std::map<int, std::vector<int>> coin_change_routes(int n, const std::vector<int>& coins);

// [src, src+s1, src+s1+s2, ...] mod n; the stride sum must reach dst.
std::vector<int> expand_route(int src, int dst, const std::vector<int>& strides, int n);

// Up to k loop-free minimum-hop paths per pair over the combined graph,
// lexicographic node order. Throws on a disconnected pair.
std::vector<std::vector<int>> shortest_paths_pair(const Topology& t, int src, int dst, int k);
void shortest_paths(const Topology& t, const std::vector<std::pair<int, int>>& pairs, int k,
                    RoutingTable* table);

struct FinderResult {
  Topology topology{1, 1};
  RoutingTable routes;
  DegreeSplit split;
};

// TopologyFinder: degree split, AllReduce rings from selected permutations,
// MP links from repeated maximum weight matching, then coin-change routes on
// the AllReduce sub-topology and k-shortest paths for MP pairs on the union.
FinderResult topology_finder(int n, int d, const TransferSet& ts, int k_paths = 2,
                             bool prime_only = false);

}  // namespace topoopt

#endif  // TOPOOPT_ROUTING_HPP
