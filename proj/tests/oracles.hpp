// Independent reference implementations used to freeze expected values.
// Everything here is deliberately brute force and shares no code with the
// library paths it checks.
#ifndef TOPOOPT_TESTS_ORACLES_HPP
#define TOPOOPT_TESTS_ORACLES_HPP

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <vector>

namespace oracles {

inline int gcd(int a, int b) { return b == 0 ? a : gcd(b, a % b); }

// Euler totient by trial gcd.
inline int phi(int k) {
  int count = 0;
  for (int p = 1; p < k; ++p) {
    if (gcd(p, k) == 1) ++count;
  }
  return count;
}

// Walks successor(i) = (i + p) mod k and reports whether all k nodes appear
// in one cycle.
inline bool single_cycle(int k, int p) {
  std::vector<bool> seen(k, false);
  int cur = 0;
  for (int step = 0; step < k; ++step) {
    if (seen[cur]) return false;
    seen[cur] = true;
    cur = (cur + p) % k;
  }
  return cur == 0 && std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

// BFS distances in the circulant graph Circ(n, coins) from node 0.
inline std::vector<int> circulant_distances(int n, const std::vector<int>& coins) {
  std::vector<int> dist(n, -1);
  dist[0] = 0;
  std::deque<int> q{0};
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (int c : coins) {
      int v = (u + c) % n;
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
    }
  }
  return dist;
}

// All loop-free minimum-hop paths between src and dst via BFS layering.
inline std::vector<std::vector<int>> all_min_hop_paths(
    const std::vector<std::vector<int>>& adj, int src, int dst) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> dist(n, -1);
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
  std::vector<std::vector<int>> out;
  if (dist[dst] < 0) return out;
  std::vector<int> path{src};
  std::function<void(int)> walk = [&](int u) {
    if (u == dst) {
      out.push_back(path);
      return;
    }
    for (int v : adj[u]) {
      if (dist[v] == dist[u] + 1) {
        path.push_back(v);
        walk(v);
        path.pop_back();
      }
    }
  };
  walk(src);
  std::sort(out.begin(), out.end());
  return out;
}

// Exhaustive maximum weight matching for small n.
inline double best_matching_weight(const std::vector<std::vector<double>>& w) {
  const int n = static_cast<int>(w.size());
  std::vector<bool> used(n, false);
  std::function<double(int)> rec = [&](int v) -> double {
    while (v < n && used[v]) ++v;
    if (v >= n) return 0.0;
    used[v] = true;
    double best = rec(v + 1);  // leave v unmatched
    for (int u = v + 1; u < n; ++u) {
      if (used[u] || w[v][u] <= 0.0) continue;
      used[u] = true;
      best = std::max(best, w[v][u] + rec(v + 1));
      used[u] = false;
    }
    used[v] = false;
    return best;
  };
  return rec(0);
}

}  // namespace oracles

#endif  // TOPOOPT_TESTS_ORACLES_HPP
