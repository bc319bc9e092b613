#include "topoopt/permutations.hpp"

#include <algorithm>
#include <cmath>

#include "topoopt/error.hpp"

namespace topoopt {

int gcd_int(int a, int b) {
  while (b != 0) {
    int t = a % b;
    a = b;
    b = t;
  }
  return a < 0 ? -a : a;
}

namespace {

bool is_prime(int x) {
  if (x < 2) return false;
  for (int f = 2; f * f <= x; ++f)
    if (x % f == 0) return false;
  return true;
}

}  // namespace

PermSet totient_perms(int n, int k, bool prime_only) {
  require(k >= 2, "totient_perms: group size must be at least 2");
  require(n >= k, "totient_perms: cluster smaller than group");
  require(k == n || n % k == 0,
          "totient_perms: group size must divide the cluster size");
  PermSet out;
  out.cluster_size = n;
  out.group_size = k;
  for (int p = 1; p < k; ++p) {
    if (gcd_int(p, k) != 1) continue;
    if (prime_only && p != 1 && !is_prime(p)) continue;
    out.strides.push_back(p);
  }
  return out;
}

Permutation ring_from_stride(int n, int k, Stride p, const std::vector<int>& members) {
  require(k >= 2, "ring_from_stride: group size must be at least 2");
  require(p.p >= 1 && p.p < k, "ring_from_stride: stride out of range");
  require(gcd_int(p.p, k) == 1, "ring_from_stride: stride is not a generator (gcd != 1)");
  require(!members.empty() && members.size() % static_cast<size_t>(k) == 0,
          "ring_from_stride: member count must be a positive multiple of k");
  require(members.size() == static_cast<size_t>(k) || n % k == 0,
          "ring_from_stride: block embedding requires k to divide n");
  (void)n;
  Permutation perm;
  perm.stride = p.p;
  const size_t blocks = members.size() / static_cast<size_t>(k);
  for (size_t b = 0; b < blocks; ++b) {
    const int* block = members.data() + b * k;
    for (int i = 0; i < k; ++i) {
      perm.successor[block[i]] = block[(i + p.p) % k];
    }
  }
  require(perm.successor.size() == members.size(),
          "ring_from_stride: members must be distinct");
  return perm;
}

std::vector<int> select_permutations(int n, int d_k, const PermSet& candidates) {
  require(d_k >= 1, "select_permutations: degree budget must be positive");
  require(static_cast<int>(candidates.strides.size()) >= d_k,
          "select_permutations: not enough candidate strides");
  std::vector<int> pool = candidates.strides;
  std::sort(pool.begin(), pool.end());

  std::vector<int> picked;
  picked.reserve(d_k);
  picked.push_back(pool.front());

  double ratio = std::pow(static_cast<double>(n), 1.0 / d_k);
  if (ratio < 2.0) ratio = 2.0;

  double q = static_cast<double>(picked.front());
  for (int i = 1; i < d_k; ++i) {
    const double target = ratio * q;
    int best = -1;
    double best_dist = 0.0;
    for (int r : pool) {
      if (std::find(picked.begin(), picked.end(), r) != picked.end()) continue;
      const double dist = std::abs(static_cast<double>(r) - target);
      if (best < 0 || dist < best_dist || (dist == best_dist && r < best)) {
        best = r;
        best_dist = dist;
      }
    }
    picked.push_back(best);
    q = static_cast<double>(best);
  }
  return picked;
}

namespace {

// Builds a binary tree over the consecutive label range [lo, hi] where the
// interior nodes take the parity of `interior_parity` (0 even, 1 odd).
// Exactly one interior node ends up with a single child; the construction
// pins that node at the top so every other interior carries two children.
void build_range(int lo, int hi, int parent, int interior_parity,
                 std::vector<int>* parent_map) {
  if (lo > hi) return;
  if (lo == hi) {
    (*parent_map)[lo] = parent;
    return;
  }
  // Root of this range: the interior-parity label closest to the middle,
  // preferring the smaller one on ties.
  const int mid = lo + (hi - lo) / 2;
  int root = -1;
  for (int delta = 0; delta <= hi - lo; ++delta) {
    for (int cand : {mid - delta, mid + delta}) {
      if (cand < lo || cand > hi) continue;
      if ((cand & 1) == interior_parity) {
        root = cand;
        break;
      }
    }
    if (root >= 0) break;
  }
  require(root >= 0, "dbt: no interior-parity label in range");
  (*parent_map)[root] = parent;
  build_range(lo, root - 1, root, interior_parity, parent_map);
  build_range(root + 1, hi, root, interior_parity, parent_map);
}

DbtTree build_tree(int k, int interior_parity) {
  DbtTree t;
  t.parent.assign(k, -1);
  // The root hangs above a full subtree so all other interiors get two
  // children; roots are 0 (even tree) and 1 (odd tree).
  t.root = interior_parity == 0 ? 0 : 1;
  if (k == 2) {
    const int other = 1 - t.root;
    t.parent[other] = t.root;
    return t;
  }
  // Remaining labels form one contiguous range on each side of the root.
  if (t.root == 0) {
    build_range(1, k - 1, 0, interior_parity, &t.parent);
  } else {
    // root == 1: label 0 becomes a leaf of the range tree over [2, k-1].
    build_range(2, k - 1, 1, interior_parity, &t.parent);
    // Attach 0 under the shallowest interior with a free slot: the root
    // itself already has one child, so 0 hangs off the root.
    t.parent[0] = 1;
  }
  return t;
}

}  // namespace

DbtPair dbt_permutations(int k, const Stride* relabel) {
  require(k >= 2, "dbt_permutations: need at least 2 nodes");
  DbtPair pair;
  pair.tree1 = build_tree(k, 0);
  if (k % 2 == 0) {
    // Even node count: tree2 is the exact label flip (v <-> v^1) of tree1,
    // which swaps the leaf and interior roles of every node.
    pair.tree2.parent.assign(k, -1);
    pair.tree2.root = pair.tree1.root ^ 1;
    for (int v = 0; v < k; ++v) {
      if (pair.tree1.parent[v] >= 0)
        pair.tree2.parent[v ^ 1] = pair.tree1.parent[v] ^ 1;
    }
  } else {
    pair.tree2 = build_tree(k, 1);
  }
  if (relabel != nullptr) {
    require(gcd_int(relabel->p, k) == 1,
            "dbt_permutations: relabel stride must be co-prime with k");
    auto apply = [&](const DbtTree& t) {
      DbtTree out;
      out.parent.assign(k, -1);
      auto map = [&](int v) { return static_cast<int>((static_cast<long long>(v) * relabel->p) % k); };
      out.root = map(t.root);
      for (int v = 0; v < k; ++v) {
        if (t.parent[v] >= 0) out.parent[map(v)] = map(t.parent[v]);
      }
      return out;
    };
    pair.tree1 = apply(pair.tree1);
    pair.tree2 = apply(pair.tree2);
  }
  return pair;
}

std::vector<std::pair<int, int>> dbt_edges(const DbtTree& tree) {
  std::vector<std::pair<int, int>> edges;
  for (int v = 0; v < static_cast<int>(tree.parent.size()); ++v) {
    if (tree.parent[v] >= 0) edges.emplace_back(tree.parent[v], v);
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

}  // namespace topoopt
