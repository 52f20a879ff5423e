#include "mixlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace mixlab {
namespace {

void check_costs(std::span<const double> costs, Index m) {
  if (m < 1) throw ContractError("makespan needs at least one machine");
  for (double c : costs)
    if (!(c >= 0.0) || !std::isfinite(c)) throw ContractError("costs must be finite and non-negative");
}

std::vector<double> sorted_desc(std::span<const double> costs) {
  std::vector<double> v(costs.begin(), costs.end());
  std::stable_sort(v.begin(), v.end(), std::greater<>());
  return v;
}

}  // namespace

double brute_force_makespan(std::span<const double> costs, Index m) {
  check_costs(costs, m);
  if (costs.size() > 16) throw ContractError("brute force limited to 16 items");
  if (costs.empty()) return 0.0;
  const auto items = sorted_desc(costs);
  const double total = std::accumulate(items.begin(), items.end(), 0.0);
  const double lower = std::max(items.front(), total / static_cast<double>(m));
  std::vector<double> load(static_cast<std::size_t>(m), 0.0);
  double best = std::numeric_limits<double>::infinity();

  std::function<void(std::size_t, double)> place = [&](std::size_t k, double current) {
    if (current >= best) return;
    if (k == items.size()) {
      best = current;
      return;
    }
    bool tried_empty = false;
    for (std::size_t j = 0; j < load.size(); ++j) {
      if (load[j] == 0.0) {
        if (tried_empty) continue;
        tried_empty = true;
      }
      load[j] += items[k];
      place(k + 1, std::max(current, load[j]));
      load[j] -= items[k];
      if (best <= lower) return;
    }
  };
  place(0, 0.0);
  return best;
}

double lpt_makespan(std::span<const double> costs, Index m) {
  check_costs(costs, m);
  std::vector<double> load(static_cast<std::size_t>(m), 0.0);
  for (double c : sorted_desc(costs)) {
    auto it = std::min_element(load.begin(), load.end());
    *it += c;
  }
  return load.empty() ? 0.0 : *std::max_element(load.begin(), load.end());
}

}  // namespace mixlab
