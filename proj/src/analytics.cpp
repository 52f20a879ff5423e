#include "mixlab/gcn.hpp"
#include "mixlab/parallel.hpp"

#include <algorithm>
#include <numeric>

namespace mixlab {
namespace {

void check_dims(std::span<const Index> dims) {
  if (dims.size() < 2) throw ContractError("dims needs at least two entries (one layer)");
  for (Index d : dims)
    if (d < 0) throw ContractError("layer widths must be non-negative");
}

void check_plan(const CsrGraph& g, const PartitionPlan& plan) {
  if (plan.num_nodes() != g.num_nodes) throw ContractError("plan does not match graph");
}

Index layer_input_sum(std::span<const Index> dims) {
  return std::accumulate(dims.begin(), dims.end() - 1, Index{0});
}

Index all_dims_sum(std::span<const Index> dims) { return std::accumulate(dims.begin(), dims.end(), Index{0}); }

Index weight_elems(std::span<const Index> dims) {
  Index total = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) total += dims[l] * dims[l + 1];
  return total;
}

}  // namespace

Index CommReport::fwd_elems() const {
  Index t = 0;
  for (const auto& l : per_layer) t += l.fwd_elems;
  return t;
}

Index CommReport::bwd_elems() const {
  Index t = 0;
  for (const auto& l : per_layer) t += l.bwd_elems;
  return t;
}

Index BalanceReport::max() const {
  return per_worker.empty() ? 0 : *std::max_element(per_worker.begin(), per_worker.end());
}

Index BalanceReport::total() const { return std::accumulate(per_worker.begin(), per_worker.end(), Index{0}); }

BalanceReport make_balance(std::vector<Index> per_worker) {
  BalanceReport r;
  r.per_worker = std::move(per_worker);
  const Index total = r.total();
  if (total > 0)
    r.ratio = static_cast<double>(r.max()) * static_cast<double>(r.per_worker.size()) /
              static_cast<double>(total);
  return r;
}

MemoryReport make_memory(std::vector<Index> per_worker) {
  MemoryReport r;
  r.per_worker = std::move(per_worker);
  for (Index b : r.per_worker) {
    r.max_bytes = std::max(r.max_bytes, b);
    r.total_bytes += b;
  }
  return r;
}

CommReport pp_comm_volume(const CsrGraph& g, const PartitionPlan& plan, std::span<const Index> dims,
                          Index element_bytes) {
  check_dims(dims);
  check_plan(g, plan);
  const Index remote = plan.total_remote();
  CommReport r;
  r.scheme = "pp";
  r.num_workers = plan.num_workers;
  r.element_bytes = element_bytes;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) r.per_layer.push_back({remote * dims[l], remote * dims[l]});
  const Index per_node = 2 * layer_input_sum(dims);
  for (const auto& rem : plan.remote) r.per_worker.push_back(static_cast<Index>(rem.size()) * per_node);
  r.weight_sync_elems = weight_elems(dims);
  return r;
}

BalanceReport pp_flops(const CsrGraph& g, const PartitionPlan& plan, std::span<const Index> dims) {
  check_dims(dims);
  check_plan(g, plan);
  std::vector<Index> work(static_cast<std::size_t>(plan.num_workers), 0);
  for (Index i = 0; i < plan.num_workers; ++i)
    for (Index v : plan.parts[i]) {
      const Index deg = degree(g, v);
      for (std::size_t l = 0; l + 1 < dims.size(); ++l) work[i] += flops_node(deg, dims[l], dims[l + 1]);
    }
  return make_balance(std::move(work));
}

MemoryReport pp_memory(const CsrGraph& g, const PartitionPlan& plan, std::span<const Index> dims,
                       Index element_bytes) {
  check_dims(dims);
  check_plan(g, plan);
  const Index per_node = all_dims_sum(dims) * element_bytes;
  std::vector<Index> bytes;
  for (Index i = 0; i < plan.num_workers; ++i)
    bytes.push_back(static_cast<Index>(plan.parts[i].size() + plan.remote[i].size()) * per_node);
  return make_memory(std::move(bytes));
}

std::vector<Range> split_ranges(Index k, Index m) {
  if (m < 1) throw ContractError("need at least one worker");
  if (k < 0) throw ContractError("cannot split a negative extent");
  std::vector<Range> out;
  out.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) out.push_back({k * i / m, k * (i + 1) / m});
  return out;
}

MopPlan mop_plan(Index n, std::span<const Index> dims, Index m) {
  check_dims(dims);
  if (n < 0) throw ContractError("negative node count");
  MopPlan plan;
  plan.num_workers = m;
  plan.num_nodes = n;
  plan.dims.assign(dims.begin(), dims.end());
  for (Index d : dims) plan.feature_ranges.push_back(split_ranges(d, m));
  plan.node_ranges = split_ranges(n, m);
  return plan;
}

CommReport mop_comm_volume(Index n, std::span<const Index> dims, Index m, Index element_bytes,
                           bool colocated) {
  const MopPlan plan = mop_plan(n, dims, m);
  // Elements of an n x d matrix that change owner when re-sharded between
  // feature slices and node slices.
  auto crossing = [&](std::size_t layer) {
    Index total = n * dims[layer];
    if (colocated)
      for (Index i = 0; i < m; ++i) total -= plan.node_ranges[i].size() * plan.feature_ranges[layer][i].size();
    return total;
  };

  CommReport r;
  r.scheme = colocated ? "mop-colocated" : "mop";
  r.num_workers = m;
  r.element_bytes = element_bytes;
  r.per_worker.assign(static_cast<std::size_t>(m), 0);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const Index v = crossing(l) + crossing(l + 1);
    r.per_layer.push_back({v, v});
    // Forward: Z_l rows to update worker i, H_{l+1} columns back to
    // aggregation worker i. Backward: dZ_l columns out, dH_{l+1} rows in.
    for (Index i = 0; i < m; ++i) {
      auto rows = [&](std::size_t layer) {
        const Index local = colocated ? plan.node_ranges[i].size() * plan.feature_ranges[layer][i].size() : 0;
        return plan.node_ranges[i].size() * dims[layer] - local;
      };
      auto cols = [&](std::size_t layer) {
        const Index local = colocated ? plan.node_ranges[i].size() * plan.feature_ranges[layer][i].size() : 0;
        return n * plan.feature_ranges[layer][i].size() - local;
      };
      r.per_worker[i] += rows(l) + cols(l + 1) + cols(l) + rows(l + 1);
    }
  }
  r.weight_sync_elems = weight_elems(dims);
  return r;
}

MopBalance mop_flops(const CsrGraph& g, std::span<const Index> dims, Index m) {
  const MopPlan plan = mop_plan(g.num_nodes, dims, m);
  std::vector<Index> aggr(static_cast<std::size_t>(m), 0);
  std::vector<Index> upd(static_cast<std::size_t>(m), 0);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    for (Index i = 0; i < m; ++i) {
      aggr[i] += 2 * g.nnz() * plan.feature_ranges[l][i].size();
      upd[i] += 2 * dims[l] * dims[l + 1] * plan.node_ranges[i].size();
    }
  return {make_balance(std::move(aggr)), make_balance(std::move(upd))};
}

MopMemory mop_memory(Index n, std::span<const Index> dims, Index m, Index element_bytes) {
  const MopPlan plan = mop_plan(n, dims, m);
  std::vector<Index> aggr(static_cast<std::size_t>(m), 0);
  std::vector<Index> upd(static_cast<std::size_t>(m), 0);
  const Index dsum = all_dims_sum(dims);
  for (Index i = 0; i < m; ++i) {
    for (std::size_t l = 0; l < dims.size(); ++l) aggr[i] += n * plan.feature_ranges[l][i].size() * element_bytes;
    upd[i] = plan.node_ranges[i].size() * dsum * element_bytes;
  }
  return {make_memory(std::move(aggr)), make_memory(std::move(upd))};
}

}  // namespace mixlab
