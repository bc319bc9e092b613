#ifndef TOPOOPT_PERMUTATIONS_HPP
#define TOPOOPT_PERMUTATIONS_HPP

#include <cstdint>
#include <map>
#include <vector>

namespace topoopt {

// A ring-AllReduce stride: server at rank i connects to rank (i + p) mod k.
// Valid strides are co-prime with the group size, which makes the successor
// relation a single Hamiltonian cycle (generator of Z_k).
struct Stride {
  int p = 1;
};

// Candidate strides for one AllReduce group of size k embedded in a cluster
// of n nodes.
struct PermSet {
  int cluster_size = 0;            // n
  int group_size = 0;              // k
  std::vector<int> strides;        // ascending, each co-prime with k
};

// Explicit successor maps, one cycle per embedded block of k members.
struct Permutation {
  int stride = 1;
  std::map<int, int> successor;    // node -> node, over the group members
};

// A double binary tree over k nodes: parent[v] == -1 marks the root.
struct DbtTree {
  std::vector<int> parent;
  int root = 0;
};

struct DbtPair {
  DbtTree tree1;   // interior nodes even, leaves odd
  DbtTree tree2;   // label-flipped twin
};

int gcd_int(int a, int b);

// All ring-generation strides for a group of size k (full mode: every p < k
// with gcd(p, k) == 1; prime mode: {1} plus primes co-prime with k).
// Requires k >= 2 and (k == n or k divides n).
PermSet totient_perms(int n, int k, bool prime_only = false);

// Build the explicit ring for stride p over the given members (rank order).
// Members are chunked into blocks of k when more than one block is passed.
Permutation ring_from_stride(int n, int k, Stride p, const std::vector<int>& members);

// Pick d_k strides from candidates so they sit close (L1) to a geometric
// sequence with ratio n^(1/d_k), clamped to 2 from below. First pick is the
// minimum candidate; ties in the projection prefer the smaller stride.
std::vector<int> select_permutations(int n, int d_k, const PermSet& candidates);

// Double binary tree pair over k nodes; optional relabel maps i -> i*p mod k
// (p co-prime with k) producing an isomorphic pair.
DbtPair dbt_permutations(int k, const Stride* relabel = nullptr);

// Edge list (parent, child) of a tree, sorted; handy for isomorphism checks.
std::vector<std::pair<int, int>> dbt_edges(const DbtTree& tree);

}  // namespace topoopt

#endif  // TOPOOPT_PERMUTATIONS_HPP
