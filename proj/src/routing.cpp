#include "topoopt/routing.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>

#include "topoopt/error.hpp"

namespace topoopt {

std::map<int, std::vector<int>> coin_change_routes(int n, const std::vector<int>& coins) {
  require(n >= 2, "coin_change_routes: need at least two nodes");
  require(!coins.empty(), "coin_change_routes: empty coin set");
  std::vector<int> sorted = coins;
  std::sort(sorted.begin(), sorted.end());
  for (int c : sorted) require(c >= 1 && c < n, "coin_change_routes: coin out of range");

  // BFS over residues: dist[m] = fewest coins summing to m (mod n).
  constexpr int kInf = 1 << 30;
  std::vector<int> dist(n, kInf);
  dist[0] = 0;
  std::deque<int> q{0};
  while (!q.empty()) {
    int m = q.front();
    q.pop_front();
    for (int c : sorted) {
      int next = (m + c) % n;
      if (dist[next] > dist[m] + 1) {
        dist[next] = dist[m] + 1;
        q.push_back(next);
      }
    }
  }
  for (int m = 1; m < n; ++m) {
    require(dist[m] < kInf, "coin_change_routes: residue " + std::to_string(m) +
                                " unreachable with the given coins");
  }

  // Back-trace choosing the smallest coin that stays on a shortest route,
  // then report the multiset ascending.
  std::map<int, std::vector<int>> routes;
  for (int m = 1; m < n; ++m) {
    std::vector<int> seq;
    int cur = m;
    while (cur != 0) {
      for (int c : sorted) {
        int prev = (cur - c + n) % n;
        if (dist[prev] == dist[cur] - 1) {
          seq.push_back(c);
          cur = prev;
          break;
        }
      }
    }
    std::sort(seq.begin(), seq.end());
    routes[m] = seq;
  }
  return routes;
}

std::vector<int> expand_route(int src, int dst, const std::vector<int>& strides, int n) {
  require(n >= 1, "expand_route: bad modulus");
  long long sum = 0;
  for (int s : strides) sum += s;
  require(((src + sum) % n + n) % n == dst % n,
          "expand_route: stride sum does not land on the destination");
  std::vector<int> path{src};
  int cur = src;
  for (int s : strides) {
    cur = (cur + s) % n;
    path.push_back(cur);
  }
  return path;
}

std::vector<std::vector<int>> shortest_paths_pair(const Topology& t, int src, int dst, int k) {
  require(k >= 1, "shortest_paths_pair: k must be positive");
  require(src != dst, "shortest_paths_pair: src == dst");
  const auto& adj = t.adjacency();

  // Distance-to-destination over the full node graph (switches included).
  std::vector<int> dist_to(t.num_nodes(), -1);
  {
    std::vector<std::vector<int>> radj(t.num_nodes());
    for (int u = 0; u < t.num_nodes(); ++u)
      for (int v : adj[u]) radj[v].push_back(u);
    std::deque<int> q{dst};
    dist_to[dst] = 0;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int v : radj[u]) {
        if (dist_to[v] < 0) {
          dist_to[v] = dist_to[u] + 1;
          q.push_back(v);
        }
      }
    }
  }
  require(dist_to[src] >= 0, "shortest_paths_pair: pair (" + std::to_string(src) + ", " +
                                 std::to_string(dst) + ") disconnected");

  // Lexicographic DFS restricted to the shortest-path DAG.
  std::vector<std::vector<int>> out;
  std::vector<int> path{src};
  std::function<void(int)> dfs = [&](int u) {
    if (static_cast<int>(out.size()) >= k) return;
    if (u == dst) {
      out.push_back(path);
      return;
    }
    for (int v : adj[u]) {
      if (dist_to[v] == dist_to[u] - 1) {
        path.push_back(v);
        dfs(v);
        path.pop_back();
        if (static_cast<int>(out.size()) >= k) return;
      }
    }
  };
  dfs(src);
  return out;
}

void shortest_paths(const Topology& t, const std::vector<std::pair<int, int>>& pairs, int k,
                    RoutingTable* table) {
  std::set<std::pair<int, int>> unique(pairs.begin(), pairs.end());
  for (const auto& [src, dst] : unique) {
    table->mp_paths[{src, dst}] = shortest_paths_pair(t, src, dst, k);
  }
}

FinderResult topology_finder(int n, int d, const TransferSet& ts, int k_paths,
                             bool prime_only) {
  require(n >= 1, "topology_finder: need at least one server");
  require(ts.num_servers == n, "topology_finder: transfer set sized for a different cluster");

  const double t_ar = ts.total_allreduce_wire_bytes();
  const double t_mp = ts.total_mp_bytes();
  DegreeSplit split;
  if (t_ar + t_mp <= 0.0) {
    split = DegreeSplit{d, 0};  // idle job: connectivity rings only
  } else {
    split = split_degree(d, t_ar, t_mp);
  }

  FinderResult result;
  result.split = split;
  if (n == 1) {
    result.topology = Topology(1, d);
    return result;
  }

  Topology g_allreduce =
      build_allreduce_subtopo(n, split.allreduce_degree, ts.allreduce_groups, prime_only);

  TrafficMatrix mp_demand;
  mp_demand.n = n;
  mp_demand.bytes.assign(static_cast<size_t>(n) * n, 0.0);
  for (const MpTransfer& t : ts.mp_transfers) mp_demand.at(t.src, t.dst) += t.bytes;
  Topology g_mp = build_mp_subtopo(n, split.mp_degree, mp_demand);

  result.topology = merge_topologies(g_allreduce, g_mp);

  // Coin-change routes per group over its selected strides.
  std::map<int, std::set<int>> group_strides;
  std::map<int, int> group_size;
  for (const TopoEdge& e : g_allreduce.edges()) {
    if (e.tag == EdgeTag::kAllReduce) group_strides[e.group].insert(e.stride);
  }
  for (const AllReduceGroup& g : ts.allreduce_groups) {
    group_size[g.id] = static_cast<int>(g.members.size());
  }
  for (const auto& [gid, strides] : group_strides) {
    const int k = group_size.count(gid) ? group_size[gid] : n;
    result.routes.allreduce_stride_routes[gid] =
        coin_change_routes(k, std::vector<int>(strides.begin(), strides.end()));
  }

  // k-shortest paths for the MP pairs on the combined topology.
  std::vector<std::pair<int, int>> pairs;
  for (const MpTransfer& t : ts.mp_transfers) pairs.emplace_back(t.src, t.dst);
  shortest_paths(result.topology, pairs, k_paths, &result.routes);
  return result;
}

}  // namespace topoopt
