#include "mixlab/parallel.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace mixlab {

Index PartitionPlan::total_remote() const {
  Index total = 0;
  for (const auto& r : remote) total += static_cast<Index>(r.size());
  return total;
}

PartitionPlan make_partition_plan(const CsrGraph& g, std::vector<Index> owner, Index num_workers) {
  if (num_workers < 1) throw ContractError("partition needs at least one worker");
  if (static_cast<Index>(owner.size()) != g.num_nodes)
    throw ContractError("owner array length must equal node count");
  PartitionPlan plan;
  plan.num_workers = num_workers;
  plan.parts.resize(static_cast<std::size_t>(num_workers));
  for (Index v = 0; v < g.num_nodes; ++v) {
    if (owner[v] < 0 || owner[v] >= num_workers)
      throw ContractError("owner of node " + std::to_string(v) + " outside [0, m)");
    plan.parts[owner[v]].push_back(v);
  }
  plan.owner = std::move(owner);
  plan.remote = remote_neighbors(g, plan);
  return plan;
}

std::vector<std::vector<Index>> remote_neighbors(const CsrGraph& g, const PartitionPlan& plan) {
  if (plan.num_nodes() != g.num_nodes) throw ContractError("plan does not match graph");
  std::vector<std::vector<Index>> remote(static_cast<std::size_t>(plan.num_workers));
  std::vector<Index> seen(static_cast<std::size_t>(g.num_nodes), -1);
  for (Index i = 0; i < plan.num_workers; ++i) {
    for (Index v : plan.parts[i]) {
      for (Index u : g.neighbors(v)) {
        if (plan.owner[u] != i && seen[u] != i) {
          seen[u] = i;
          remote[i].push_back(u);
        }
      }
    }
    std::sort(remote[i].begin(), remote[i].end());
  }
  return remote;
}

PartitionPlan partition_random(const CsrGraph& g, Index m, std::uint64_t seed) {
  if (m < 1 || m > g.num_nodes)
    throw ContractError("partition: need 1 <= m <= n (m=" + std::to_string(m) +
                        ", n=" + std::to_string(g.num_nodes) + ")");
  std::vector<Index> owner(static_cast<std::size_t>(g.num_nodes));
  for (Index v = 0; v < g.num_nodes; ++v)
    owner[v] = static_cast<Index>(hash_combine(seed, static_cast<std::uint64_t>(v)) %
                                  static_cast<std::uint64_t>(m));
  return make_partition_plan(g, std::move(owner), m);
}

namespace {

constexpr Index kUnreached = std::numeric_limits<Index>::max();

/// Hop distance from the set of assigned nodes (all zero when none are).
std::vector<Index> distance_from_assigned(const CsrGraph& g, const std::vector<Index>& owner) {
  std::vector<Index> dist(static_cast<std::size_t>(g.num_nodes), kUnreached);
  std::deque<Index> queue;
  for (Index v = 0; v < g.num_nodes; ++v)
    if (owner[v] >= 0) {
      dist[v] = 0;
      queue.push_back(v);
    }
  while (!queue.empty()) {
    const Index u = queue.front();
    queue.pop_front();
    for (Index v : g.neighbors(u))
      if (dist[v] == kUnreached) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
  }
  return dist;
}

}  // namespace

PartitionPlan partition_bfs(const CsrGraph& g, Index m) {
  const Index n = g.num_nodes;
  if (m < 1 || m > n)
    throw ContractError("partition: need 1 <= m <= n (m=" + std::to_string(m) +
                        ", n=" + std::to_string(n) + ")");
  const Index cap = (n + m - 1) / m;
  std::vector<Index> owner(static_cast<std::size_t>(n), -1);
  std::vector<Index> sizes(static_cast<std::size_t>(m), 0);

  for (Index r = 0; r < m; ++r) {
    const auto dist = distance_from_assigned(g, owner);
    // Farthest reachable node; untouched components only when nothing is reachable.
    Index seed = -1;
    for (Index v = 0; v < n; ++v) {
      if (owner[v] >= 0) continue;
      if (seed < 0 || (dist[seed] == kUnreached && dist[v] != kUnreached) ||
          (dist[v] != kUnreached && dist[v] > dist[seed]))
        seed = v;
    }
    if (seed < 0) break;

    Index next_fresh = 0;
    std::deque<Index> queue;
    while (sizes[r] < cap) {
      if (queue.empty()) {
        // Region exhausted its component: continue in a component no region has touched.
        if (seed < 0) {
          while (next_fresh < n && (owner[next_fresh] >= 0 || dist[next_fresh] != kUnreached)) ++next_fresh;
          if (next_fresh == n) break;
          seed = next_fresh;
        }
        owner[seed] = r;
        ++sizes[r];
        queue.push_back(seed);
        seed = -1;
        continue;
      }
      const Index u = queue.front();
      queue.pop_front();
      for (Index v : g.neighbors(u)) {
        if (sizes[r] >= cap) break;
        if (owner[v] < 0) {
          owner[v] = r;
          ++sizes[r];
          queue.push_back(v);
        }
      }
    }
  }

  // Stranded nodes join an adjacent region.
  std::deque<Index> queue;
  for (Index v = 0; v < n; ++v)
    if (owner[v] >= 0) queue.push_back(v);
  while (!queue.empty()) {
    const Index u = queue.front();
    queue.pop_front();
    for (Index v : g.neighbors(u))
      if (owner[v] < 0) {
        owner[v] = owner[u];
        ++sizes[owner[u]];
        queue.push_back(v);
      }
  }

  // Components no region reached go whole to the smallest region.
  for (Index s = 0; s < n; ++s) {
    if (owner[s] >= 0) continue;
    const Index r = std::min_element(sizes.begin(), sizes.end()) - sizes.begin();
    std::deque<Index> comp{s};
    owner[s] = r;
    ++sizes[r];
    while (!comp.empty()) {
      const Index u = comp.front();
      comp.pop_front();
      for (Index v : g.neighbors(u))
        if (owner[v] < 0) {
          owner[v] = r;
          ++sizes[r];
          comp.push_back(v);
        }
    }
  }
  return make_partition_plan(g, std::move(owner), m);
}

}  // namespace mixlab
