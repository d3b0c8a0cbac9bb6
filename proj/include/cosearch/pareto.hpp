#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cosearch {

struct CostScore {
  double cost = 0.0;   // lower is better
  double score = 0.0;  // higher is better
};

/// Indices (ascending) of the non-dominated points. q dominates p when
/// cost(q) <= cost(p), score(q) >= score(p) and one of them is strict. Among
/// exact duplicates only the first occurrence is kept. O(n log n).
std::vector<std::size_t> pareto_frontier(std::span<const CostScore> points);

}  // namespace cosearch
