#pragma once

#include "mixlab/gcn.hpp"
#include "mixlab/parallel.hpp"

#include <algorithm>
#include <numeric>

namespace mixlab {

/// Outcome of a simulated multi-worker run. `comm` is the message ledger of
/// one training iteration (every iteration moves the same volume).
template <typename Scalar>
struct ParallelRun {
  GcnModel<Scalar> model;
  std::vector<double> loss_trace;
  CommReport comm;
};

namespace detail {

inline Index weight_elems(const std::vector<Index>& dims) {
  Index total = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) total += dims[l] * dims[l + 1];
  return total;
}

/// Accumulate `add` into `acc`, taking the first contribution verbatim.
template <typename M>
void sum_into(std::optional<M>& acc, const M& add) {
  if (acc)
    *acc += add;
  else
    acc = add;
}

/// Worker-local slice of A_hat: rows V_i, columns indexing the sorted
/// buffer V_i u R_i. The global-to-buffer map is monotone, so each row keeps
/// its column order and accumulation order.
struct LocalBlock {
  std::vector<Index> buffer;
  std::vector<Index> row_offsets{0};
  std::vector<Index> col_indices;
  std::vector<double> values;

  CsrRef ref(Index rows) const {
    return {rows, static_cast<Index>(buffer.size()), row_offsets, col_indices, values};
  }
};

inline LocalBlock make_local_block(const CsrGraph& a_hat, std::span<const Index> part,
                                   std::span<const Index> remote, std::vector<Index>& scratch) {
  LocalBlock b;
  b.buffer.resize(part.size() + remote.size());
  std::merge(part.begin(), part.end(), remote.begin(), remote.end(), b.buffer.begin());
  for (std::size_t k = 0; k < b.buffer.size(); ++k) scratch[b.buffer[k]] = static_cast<Index>(k);
  for (Index v : part) {
    const Index begin = a_hat.row_offsets[v];
    const Index end = a_hat.row_offsets[v + 1];
    for (Index k = begin; k < end; ++k) {
      const Index u = a_hat.col_indices[k];
      if (scratch[u] < 0) throw ContractError("plan remote sets do not cover the propagation matrix");
      b.col_indices.push_back(scratch[u]);
      if (a_hat.values) b.values.push_back((*a_hat.values)[k]);
    }
    b.row_offsets.push_back(static_cast<Index>(b.col_indices.size()));
  }
  for (Index u : b.buffer) scratch[u] = -1;
  return b;
}

template <typename Scalar>
void apply_dropout(FeatureMatrix<Scalar>& dz, const Bitmask& m, Scalar scale) {
  for (Index i = 0; i < dz.rows(); ++i)
    for (Index j = 0; j < dz.cols(); ++j) dz(i, j) = m.test(i, j) ? dz(i, j) * scale : Scalar{0};
}

}  // namespace detail

/// Partition parallelism. Worker i owns the rows V_i; each layer it gathers
/// the rows of R_i from their owners, aggregates its own rows over the local
/// block and applies the dense update. Backward gathers the R_i rows of the
/// aggregation gradient the same way. Weight gradients and the loss are
/// summed over workers in worker order.
template <typename Scalar>
ParallelRun<Scalar> pp_execute(const CsrGraph& a_hat, const PartitionPlan& plan, GcnModel<Scalar> model,
                               const FeatureMatrix<Scalar>& x, std::span<const Index> labels,
                               const TrainConfig& config) {
  config.validate();
  model.validate();
  const Index n = a_hat.num_nodes;
  if (plan.num_nodes() != n || static_cast<Index>(plan.parts.size()) != plan.num_workers ||
      static_cast<Index>(plan.remote.size()) != plan.num_workers)
    throw ContractError("pp_execute: plan does not match graph");
  if (x.rows() != n || x.cols() != model.dims.front()) throw ContractError("pp_execute: feature shape mismatch");
  if (static_cast<Index>(labels.size()) != n) throw ContractError("pp_execute: one label per node required");

  const Index m = plan.num_workers;
  const Index layers = model.num_layers();
  std::vector<Index> slot(static_cast<std::size_t>(n));  // row of v inside its owner's matrices
  for (Index i = 0; i < m; ++i)
    for (std::size_t k = 0; k < plan.parts[i].size(); ++k) slot[plan.parts[i][k]] = static_cast<Index>(k);

  std::vector<detail::LocalBlock> blocks;
  std::vector<std::vector<Index>> local_labels(static_cast<std::size_t>(m));
  {
    std::vector<Index> scratch(static_cast<std::size_t>(n), -1);
    for (Index i = 0; i < m; ++i) {
      blocks.push_back(detail::make_local_block(a_hat, plan.parts[i], plan.remote[i], scratch));
      for (Index v : plan.parts[i]) local_labels[i].push_back(labels[v]);
    }
  }

  CommReport ledger;
  ledger.scheme = "pp";
  ledger.num_workers = m;
  ledger.element_bytes = sizeof(Scalar);
  ledger.per_layer.assign(static_cast<std::size_t>(layers), {});
  ledger.per_worker.assign(static_cast<std::size_t>(m), 0);
  ledger.weight_sync_elems = detail::weight_elems(model.dims);

  // Fills the buffer rows of every worker from the owners' row blocks and
  // returns the number of elements that crossed workers.
  auto gather = [&](const std::vector<FeatureMatrix<Scalar>>& owned, Index width, bool record,
                    std::vector<FeatureMatrix<Scalar>>& into) {
    Index moved = 0;
    into.resize(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) {
      const auto& buf = blocks[i].buffer;
      into[i].resize(static_cast<Index>(buf.size()), width);
      for (std::size_t k = 0; k < buf.size(); ++k) {
        const Index v = buf[k];
        const Index owner = plan.owner[v];
        into[i].row(static_cast<Index>(k)) = owned[owner].row(slot[v]);
        if (owner != i) {
          moved += width;
          if (record) ledger.per_worker[i] += width;
        }
      }
    }
    return moved;
  };

  ParallelRun<Scalar> run;
  std::vector<FeatureMatrix<Scalar>> x_owned(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    x_owned[i].resize(static_cast<Index>(plan.parts[i].size()), x.cols());
    for (std::size_t k = 0; k < plan.parts[i].size(); ++k) x_owned[i].row(static_cast<Index>(k)) = x.row(plan.parts[i][k]);
  }

  for (Index t = 0; t < config.iterations; ++t) {
    const bool record = t == 0;
    // h[l][i]: worker i's rows of H^(l); z[l][i]: its rows of Z^(l).
    std::vector<std::vector<FeatureMatrix<Scalar>>> h{x_owned};
    std::vector<std::vector<FeatureMatrix<Scalar>>> z;
    std::vector<std::vector<std::optional<Bitmask>>> drop;
    std::vector<FeatureMatrix<Scalar>> staged;
    for (Index l = 0; l < layers; ++l) {
      const Index width = model.dims[l];
      const Index moved = gather(h[l], width, record, staged);
      if (record) ledger.per_layer[l].fwd_elems += moved;
      std::vector<FeatureMatrix<Scalar>> zl(static_cast<std::size_t>(m)), hl(static_cast<std::size_t>(m));
      std::vector<std::optional<Bitmask>> dl(static_cast<std::size_t>(m));
      for (Index i = 0; i < m; ++i) {
        const Index rows = static_cast<Index>(plan.parts[i].size());
        const Bitmask* mask = nullptr;
        if (model.has_dropout(l)) {
          dl[i] = model.dropout(t, l).block(plan.parts[i], 0, width);
          mask = &*dl[i];
        }
        auto out = layer_forward<Scalar>(blocks[i].ref(rows), staged[i], model.weights[l], mask,
                                         mask ? model.dropout_scale() : Scalar{1}, l + 1 < layers);
        zl[i] = std::move(out.z);
        hl[i] = std::move(out.h_next);
      }
      z.push_back(std::move(zl));
      h.push_back(std::move(hl));
      drop.push_back(std::move(dl));
    }

    double loss_sum = 0.0;
    bool first = true;
    std::vector<FeatureMatrix<Scalar>> dy(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) {
      auto part = cross_entropy_rows<Scalar>(h[layers][i], local_labels[i], n);
      if (plan.parts[i].empty()) {
        dy[i] = std::move(part.dlogits);
        continue;
      }
      loss_sum = first ? part.loss : loss_sum + part.loss;
      first = false;
      dy[i] = std::move(part.dlogits);
    }
    const double loss = n > 0 ? loss_sum / static_cast<double>(n) : 0.0;

    std::vector<WeightMatrix<Scalar>> grads(static_cast<std::size_t>(layers));
    for (Index l = layers - 1; l >= 0; --l) {
      std::optional<WeightMatrix<Scalar>> dw;
      std::vector<FeatureMatrix<Scalar>> dz(static_cast<std::size_t>(m));
      for (Index i = 0; i < m; ++i) {
        dz[i] = dy[i] * model.weights[l];
        if (plan.parts[i].empty()) continue;
        detail::sum_into(dw, WeightMatrix<Scalar>(dy[i].transpose() * z[l][i]));
        if (drop[l][i]) detail::apply_dropout<Scalar>(dz[i], *drop[l][i], model.dropout_scale());
      }
      grads[l] = dw ? std::move(*dw) : WeightMatrix<Scalar>::Zero(model.dims[l + 1], model.dims[l]);
      const Index moved = gather(dz, model.dims[l], record, staged);
      if (record) ledger.per_layer[l].bwd_elems += moved;
      for (Index i = 0; i < m; ++i) {
        const Index rows = static_cast<Index>(plan.parts[i].size());
        const Bitmask out_mask = l > 0 ? make_relu_mask(h[l][i]) : Bitmask::ones(rows, model.dims[l]);
        dy[i] = sspmm<Scalar>(blocks[i].ref(rows), staged[i], out_mask).out;
      }
    }
    sgd_step(model, grads, config.learning_rate);
    run.loss_trace.push_back(loss);
  }
  run.model = std::move(model);
  run.comm = std::move(ledger);
  return run;
}

template <typename Scalar>
ParallelRun<Scalar> pp_execute(const CsrGraph& a_hat, const PartitionPlan& plan, GcnModel<Scalar> model,
                               const Dataset& data, const TrainConfig& config) {
  validate(data);
  return pp_execute<Scalar>(a_hat, plan, std::move(model), FeatureMatrix<Scalar>(data.features.cast<Scalar>()),
                            data.labels, config);
}

/// Model parallelism. Aggregation worker i holds columns fr_i of every
/// layer's features and runs the masked aggregation on them; update worker i
/// holds node rows nr_i and runs the dense update and the loss. Two
/// all-to-all exchanges per layer move Z to node slices and H back to
/// feature slices; the backward pass retraces them.
template <typename Scalar>
ParallelRun<Scalar> mop_execute(const CsrGraph& a_hat, const MopPlan& plan, GcnModel<Scalar> model,
                                const FeatureMatrix<Scalar>& x, std::span<const Index> labels,
                                const TrainConfig& config) {
  config.validate();
  model.validate();
  const Index n = a_hat.num_nodes;
  const Index m = plan.num_workers;
  if (plan.num_nodes != n || plan.dims != model.dims || static_cast<Index>(plan.node_ranges.size()) != m ||
      plan.feature_ranges.size() != model.dims.size())
    throw ContractError("mop_execute: plan does not match graph or model");
  if (x.rows() != n || x.cols() != model.dims.front()) throw ContractError("mop_execute: feature shape mismatch");
  if (static_cast<Index>(labels.size()) != n) throw ContractError("mop_execute: one label per node required");

  const Index layers = model.num_layers();
  const CsrRef a = a_hat.ref();
  const auto& fr = plan.feature_ranges;
  const auto& nr = plan.node_ranges;

  CommReport ledger;
  ledger.scheme = "mop";
  ledger.num_workers = m;
  ledger.element_bytes = sizeof(Scalar);
  ledger.per_layer.assign(static_cast<std::size_t>(layers), {});
  ledger.per_worker.assign(static_cast<std::size_t>(m), 0);
  ledger.weight_sync_elems = detail::weight_elems(model.dims);

  // Feature slices (n x |fr_i|) to node slices (|nr_j| x d).
  auto to_nodes = [&](const std::vector<FeatureMatrix<Scalar>>& cols, Index layer, bool record) {
    const Index d = model.dims[layer];
    std::vector<FeatureMatrix<Scalar>> rows(static_cast<std::size_t>(m));
    Index moved = 0;
    for (Index j = 0; j < m; ++j) {
      rows[j].resize(nr[j].size(), d);
      for (Index i = 0; i < m; ++i) {
        const Range c = fr[layer][i];
        rows[j].block(0, c.begin, nr[j].size(), c.size()) = cols[i].block(nr[j].begin, 0, nr[j].size(), c.size());
        const Index elems = nr[j].size() * c.size();
        moved += elems;
        if (record) ledger.per_worker[j] += elems;
      }
    }
    return std::pair{std::move(rows), moved};
  };
  // Node slices back to feature slices.
  auto to_features = [&](const std::vector<FeatureMatrix<Scalar>>& rows, Index layer, bool record) {
    std::vector<FeatureMatrix<Scalar>> cols(static_cast<std::size_t>(m));
    Index moved = 0;
    for (Index i = 0; i < m; ++i) {
      const Range c = fr[layer][i];
      cols[i].resize(n, c.size());
      for (Index j = 0; j < m; ++j) {
        cols[i].block(nr[j].begin, 0, nr[j].size(), c.size()) = rows[j].block(0, c.begin, nr[j].size(), c.size());
        const Index elems = nr[j].size() * c.size();
        moved += elems;
        if (record) ledger.per_worker[i] += elems;
      }
    }
    return std::pair{std::move(cols), moved};
  };

  std::vector<FeatureMatrix<Scalar>> x_cols(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) x_cols[i] = x.middleCols(fr[0][i].begin, fr[0][i].size());
  std::vector<std::vector<Index>> local_labels(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) local_labels[j].assign(labels.begin() + nr[j].begin, labels.begin() + nr[j].end);

  ParallelRun<Scalar> run;
  for (Index t = 0; t < config.iterations; ++t) {
    const bool record = t == 0;
    std::vector<std::vector<FeatureMatrix<Scalar>>> h_cols{x_cols};  // aggregation side
    std::vector<std::vector<FeatureMatrix<Scalar>>> z_rows;          // update side
    std::vector<std::vector<std::optional<Bitmask>>> drop;
    std::vector<FeatureMatrix<Scalar>> logits;
    for (Index l = 0; l < layers; ++l) {
      std::vector<FeatureMatrix<Scalar>> zc(static_cast<std::size_t>(m));
      std::vector<std::optional<Bitmask>> dl(static_cast<std::size_t>(m));
      for (Index i = 0; i < m; ++i) {
        const Range c = fr[l][i];
        if (model.has_dropout(l)) {
          dl[i] = model.dropout(t, l).block(0, n, c.begin, c.end);
          zc[i] = sspmm<Scalar>(a, h_cols[l][i], *dl[i], model.dropout_scale()).out;
        } else {
          zc[i] = sspmm<Scalar>(a, h_cols[l][i], Bitmask::ones(n, c.size())).out;
        }
      }
      auto [zr, moved_in] = to_nodes(zc, l, record);
      std::vector<FeatureMatrix<Scalar>> hr(static_cast<std::size_t>(m));
      for (Index j = 0; j < m; ++j) {
        FeatureMatrix<Scalar> y = zr[j] * model.weights[l].transpose();
        hr[j] = l + 1 < layers ? relu<Scalar>(y) : std::move(y);
      }
      auto [hc, moved_out] = to_features(hr, l + 1, record);
      if (record) ledger.per_layer[l].fwd_elems += moved_in + moved_out;
      if (l + 1 == layers) logits = std::move(hr);
      z_rows.push_back(std::move(zr));
      h_cols.push_back(std::move(hc));
      drop.push_back(std::move(dl));
    }

    double loss_sum = 0.0;
    bool first = true;
    std::vector<FeatureMatrix<Scalar>> dy(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) {
      auto part = cross_entropy_rows<Scalar>(logits[j], local_labels[j], n);
      if (nr[j].size() > 0) {
        loss_sum = first ? part.loss : loss_sum + part.loss;
        first = false;
      }
      dy[j] = std::move(part.dlogits);
    }
    const double loss = n > 0 ? loss_sum / static_cast<double>(n) : 0.0;

    std::vector<WeightMatrix<Scalar>> grads(static_cast<std::size_t>(layers));
    for (Index l = layers - 1; l >= 0; --l) {
      std::optional<WeightMatrix<Scalar>> dw;
      std::vector<FeatureMatrix<Scalar>> dz(static_cast<std::size_t>(m));
      for (Index j = 0; j < m; ++j) {
        dz[j] = dy[j] * model.weights[l];
        if (nr[j].size() > 0) detail::sum_into(dw, WeightMatrix<Scalar>(dy[j].transpose() * z_rows[l][j]));
      }
      grads[l] = dw ? std::move(*dw) : WeightMatrix<Scalar>::Zero(model.dims[l + 1], model.dims[l]);
      auto [dzc, moved_out] = to_features(dz, l, record);
      if (record) ledger.per_layer[l].bwd_elems += moved_out;
      std::vector<FeatureMatrix<Scalar>> dh(static_cast<std::size_t>(m));
      for (Index i = 0; i < m; ++i) {
        if (drop[l][i]) detail::apply_dropout<Scalar>(dzc[i], *drop[l][i], model.dropout_scale());
        const Bitmask out_mask = l > 0 ? make_relu_mask(h_cols[l][i]) : Bitmask::ones(n, fr[l][i].size());
        dh[i] = sspmm<Scalar>(a, dzc[i], out_mask).out;
      }
      if (l > 0) {
        // dH^(l) feeds layer l-1's update on node slices.
        auto [dhr, moved_in] = to_nodes(dh, l, record);
        if (record) ledger.per_layer[l - 1].bwd_elems += moved_in;
        dy = std::move(dhr);
      }
    }
    sgd_step(model, grads, config.learning_rate);
    run.loss_trace.push_back(loss);
  }
  run.model = std::move(model);
  run.comm = std::move(ledger);
  return run;
}

template <typename Scalar>
ParallelRun<Scalar> mop_execute(const CsrGraph& a_hat, const MopPlan& plan, GcnModel<Scalar> model,
                                const Dataset& data, const TrainConfig& config) {
  validate(data);
  return mop_execute<Scalar>(a_hat, plan, std::move(model), FeatureMatrix<Scalar>(data.features.cast<Scalar>()),
                             data.labels, config);
}

}  // namespace mixlab
