#pragma once

#include "mixlab/graph.hpp"

#include <span>
#include <string>
#include <vector>

namespace mixlab {

/// Node partition for partition parallelism. parts[i] holds V_i in
/// ascending id order; remote[i] holds R_i, the nodes owned elsewhere that
/// some node of V_i is adjacent to, also ascending.
struct PartitionPlan {
  Index num_workers = 0;
  std::vector<Index> owner;
  std::vector<std::vector<Index>> parts;
  std::vector<std::vector<Index>> remote;

  Index num_nodes() const { return static_cast<Index>(owner.size()); }
  Index total_remote() const;
};

/// Build a plan from an explicit owner array. Workers may be empty.
PartitionPlan make_partition_plan(const CsrGraph& g, std::vector<Index> owner, Index num_workers);

/// owner(v) = hash(seed, v) mod m. Requires 1 <= m <= n.
PartitionPlan partition_random(const CsrGraph& g, Index m, std::uint64_t seed);

/// BFS-greedy contiguous regions of at most ceil(n/m) nodes. Each region is
/// seeded at the unassigned node farthest from everything already assigned
/// and grown breadth-first through unassigned nodes. Nodes stranded when
/// every frontier is full join an adjacent region, which keeps regions
/// connected; untouched components go to the smallest region.
PartitionPlan partition_bfs(const CsrGraph& g, Index m);

std::vector<std::vector<Index>> remote_neighbors(const CsrGraph& g, const PartitionPlan& plan);

struct LayerVolume {
  Index fwd_elems = 0;
  Index bwd_elems = 0;
  friend bool operator==(const LayerVolume&, const LayerVolume&) = default;
};

/// Feature/gradient traffic of one training iteration. per_worker counts
/// elements received by each worker (both directions, all layers). Weight
/// synchronisation is reported apart from the feature traffic.
struct CommReport {
  std::string scheme;
  Index num_workers = 0;
  Index element_bytes = 4;
  std::vector<LayerVolume> per_layer;
  std::vector<Index> per_worker;
  Index weight_sync_elems = 0;

  Index fwd_elems() const;
  Index bwd_elems() const;
  Index total_elems() const { return fwd_elems() + bwd_elems(); }
  Index total_bytes() const { return total_elems() * element_bytes; }
  friend bool operator==(const CommReport&, const CommReport&) = default;
};

/// Per-worker FLOPs and max/mean ratio (1.0 when all work is zero).
struct BalanceReport {
  std::vector<Index> per_worker;
  double ratio = 1.0;
  Index max() const;
  Index total() const;
};

BalanceReport make_balance(std::vector<Index> per_worker);

/// Per-worker feature memory in bytes, all layer activations retained.
struct MemoryReport {
  std::vector<Index> per_worker;
  Index max_bytes = 0;
  Index total_bytes = 0;
  friend bool operator==(const MemoryReport&, const MemoryReport&) = default;
};

MemoryReport make_memory(std::vector<Index> per_worker);

CommReport pp_comm_volume(const CsrGraph& g, const PartitionPlan& plan, std::span<const Index> dims,
                          Index element_bytes = 4);
BalanceReport pp_flops(const CsrGraph& g, const PartitionPlan& plan, std::span<const Index> dims);
MemoryReport pp_memory(const CsrGraph& g, const PartitionPlan& plan, std::span<const Index> dims,
                       Index element_bytes = 4);

/// Half-open index range [begin, end).
struct Range {
  Index begin = 0;
  Index end = 0;
  Index size() const { return end - begin; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Worker i's share floor(k*i/m) .. floor(k*(i+1)/m) of k items.
std::vector<Range> split_ranges(Index k, Index m);

/// Feature ranges per layer width (feature_ranges[l] splits dims[l]) and
/// node ranges for the update group.
struct MopPlan {
  Index num_workers = 0;
  Index num_nodes = 0;
  std::vector<Index> dims;
  std::vector<std::vector<Range>> feature_ranges;
  std::vector<Range> node_ranges;
};

MopPlan mop_plan(Index n, std::span<const Index> dims, Index m);

/// All-to-all traffic between the aggregation and update groups: per layer
/// n*d_l + n*d_{l+1} in each direction, independent of m. With `colocated`
/// the share each worker keeps locally (1/m) is not counted.
CommReport mop_comm_volume(Index n, std::span<const Index> dims, Index m, Index element_bytes = 4,
                           bool colocated = false);

struct MopBalance {
  BalanceReport aggregation;
  BalanceReport update;
};
MopBalance mop_flops(const CsrGraph& g, std::span<const Index> dims, Index m);

struct MopMemory {
  MemoryReport aggregation;
  MemoryReport update;
};
MopMemory mop_memory(Index n, std::span<const Index> dims, Index m, Index element_bytes = 4);

/// Exact identical-machines makespan by exhaustive assignment (|costs| <= 16).
double brute_force_makespan(std::span<const double> costs, Index m);

/// Longest-processing-time-first greedy makespan.
double lpt_makespan(std::span<const double> costs, Index m);

}  // namespace mixlab
