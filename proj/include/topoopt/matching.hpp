#ifndef TOPOOPT_MATCHING_HPP
#define TOPOOPT_MATCHING_HPP

#include <utility>
#include <vector>

namespace topoopt {

// Maximum weight matching on a general graph (Edmonds' blossom algorithm,
// primal-dual O(n^3) formulation). Input is a symmetric nonnegative weight
// matrix with zero diagonal; zero-weight pairs are treated as non-edges.
// Returns the matched pairs as (i, j) with i < j, sorted. The pivoting order
// is fixed, so the result is deterministic; among equal-weight optima the
// search is biased toward lexicographically smaller edges.
std::vector<std::pair<int, int>> max_weight_matching(
    const std::vector<std::vector<double>>& weights);

}  // namespace topoopt

#endif  // TOPOOPT_MATCHING_HPP
