#include "cosearch/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cosearch/errors.hpp"

namespace cosearch {

std::vector<std::size_t> pareto_frontier(std::span<const CostScore> points) {
  for (const auto& p : points) {
    if (!std::isfinite(p.cost) || !std::isfinite(p.score)) {
      throw InvariantViolation("points", "cost and score must be finite");
    }
  }

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].cost != points[b].cost) return points[a].cost < points[b].cost;
    if (points[a].score != points[b].score) return points[a].score > points[b].score;
    return a < b;
  });

  // Sweep cost groups in ascending order. Within a group only the leading
  // entry (highest score, lowest index) can survive, and only if it beats
  // every score seen at strictly lower cost.
  std::vector<std::size_t> frontier;
  double best_lower_cost = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  while (i < order.size()) {
    const std::size_t lead = order[i];
    if (points[lead].score > best_lower_cost) frontier.push_back(lead);
    best_lower_cost = std::max(best_lower_cost, points[lead].score);
    while (i < order.size() && points[order[i]].cost == points[lead].cost) ++i;
  }
  std::sort(frontier.begin(), frontier.end());
  return frontier;
}

}  // namespace cosearch
