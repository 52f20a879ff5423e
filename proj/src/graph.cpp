#include "mixlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mixlab {

CsrGraph from_edges(Index num_nodes, std::vector<Edge> edges, bool make_symmetric) {
  if (num_nodes < 0) throw ContractError("negative node count");
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes)
      throw RangeError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                       ") outside [0, " + std::to_string(num_nodes) + ")");
  }
  if (make_symmetric) {
    const auto count = edges.size();
    edges.reserve(2 * count);
    for (std::size_t i = 0; i < count; ++i) {
      const auto [u, v] = edges[i];
      if (u != v) edges.emplace_back(v, u);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  CsrGraph g;
  g.num_nodes = num_nodes;
  g.row_offsets.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  g.col_indices.reserve(edges.size());
  for (const auto& [u, v] : edges) {
    ++g.row_offsets[u + 1];
    g.col_indices.push_back(v);
  }
  for (Index v = 0; v < num_nodes; ++v) g.row_offsets[v + 1] += g.row_offsets[v];
  g.symmetric = make_symmetric || is_symmetric(g);
  return g;
}

void validate(const CsrGraph& g) {
  if (g.num_nodes < 0) throw ContractError("negative node count");
  if (g.row_offsets.size() != static_cast<std::size_t>(g.num_nodes) + 1)
    throw ContractError("row_offsets must have n+1 entries");
  if (g.row_offsets.front() != 0) throw ContractError("row_offsets[0] must be 0");
  if (g.row_offsets.back() != g.nnz()) throw ContractError("row_offsets[n] must equal nnz");
  for (Index v = 0; v < g.num_nodes; ++v) {
    if (g.row_offsets[v + 1] < g.row_offsets[v])
      throw ContractError("row_offsets decreasing at row " + std::to_string(v));
    const auto nb = g.neighbors(v);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] < 0 || nb[k] >= g.num_nodes)
        throw ContractError("column index out of range in row " + std::to_string(v));
      if (k > 0 && nb[k] <= nb[k - 1])
        throw ContractError("column indices not strictly increasing in row " +
                            std::to_string(v));
    }
  }
  if (g.values) {
    if (g.values->size() != g.col_indices.size())
      throw ContractError("values length must equal nnz");
    for (double x : *g.values)
      if (!std::isfinite(x) || x <= 0.0) throw ContractError("edge values must be finite and > 0");
  }
  if (g.symmetric && !is_symmetric(g)) throw ContractError("symmetric flag set on asymmetric graph");
}

bool is_symmetric(const CsrGraph& g) {
  for (Index u = 0; u < g.num_nodes; ++u) {
    for (Index v : g.neighbors(u)) {
      const auto back = g.neighbors(v);
      if (!std::binary_search(back.begin(), back.end(), u)) return false;
    }
  }
  return true;
}

Index degree(const CsrGraph& g, Index v) {
  if (v < 0 || v >= g.num_nodes)
    throw RangeError("node " + std::to_string(v) + " outside [0, " + std::to_string(g.num_nodes) + ")");
  return g.row_offsets[v + 1] - g.row_offsets[v];
}

Index max_degree(const CsrGraph& g) {
  Index best = 0;
  for (Index v = 0; v < g.num_nodes; ++v) best = std::max(best, g.row_offsets[v + 1] - g.row_offsets[v]);
  return best;
}

Index count_self_loops(const CsrGraph& g) {
  Index loops = 0;
  for (Index v = 0; v < g.num_nodes; ++v) {
    const auto nb = g.neighbors(v);
    if (std::binary_search(nb.begin(), nb.end(), v)) ++loops;
  }
  return loops;
}

Index undirected_edge_count(const CsrGraph& g) {
  const Index loops = count_self_loops(g);
  return (g.nnz() - loops) / 2 + loops;
}

CsrGraph normalize(const CsrGraph& g) {
  if (g.weighted()) throw ContractError("normalize expects an unweighted graph");
  if (!is_symmetric(g)) throw ContractError("normalize expects a symmetric graph");

  CsrGraph out;
  out.num_nodes = g.num_nodes;
  out.symmetric = true;
  out.row_offsets.assign(static_cast<std::size_t>(g.num_nodes) + 1, 0);
  out.col_indices.reserve(static_cast<std::size_t>(g.nnz() + g.num_nodes));

  // Pattern of A + I, merging any existing self-loop with the identity.
  for (Index u = 0; u < g.num_nodes; ++u) {
    const auto nb = g.neighbors(u);
    bool placed = false;
    for (Index v : nb) {
      if (!placed && v >= u) {
        if (v != u) out.col_indices.push_back(u);
        placed = true;
      }
      out.col_indices.push_back(v);
    }
    if (!placed) out.col_indices.push_back(u);
    out.row_offsets[u + 1] = static_cast<Index>(out.col_indices.size());
  }

  std::vector<double> dtilde(static_cast<std::size_t>(g.num_nodes));
  for (Index u = 0; u < g.num_nodes; ++u)
    dtilde[u] = static_cast<double>(out.row_offsets[u + 1] - out.row_offsets[u]);

  std::vector<double> values(out.col_indices.size());
  for (Index u = 0; u < g.num_nodes; ++u)
    for (Index k = out.row_offsets[u]; k < out.row_offsets[u + 1]; ++k)
      values[k] = 1.0 / std::sqrt(dtilde[u] * dtilde[out.col_indices[k]]);
  out.values = std::move(values);
  return out;
}

void validate(const Dataset& d) {
  validate(d.graph);
  if (d.features.rows() != d.graph.num_nodes)
    throw ContractError("feature rows must equal node count");
  if (!d.features.allFinite()) throw ContractError("features must be finite");
  if (static_cast<Index>(d.labels.size()) != d.graph.num_nodes)
    throw ContractError("label count must equal node count");
  for (Index y : d.labels)
    if (y < 0 || y >= d.num_classes) throw ContractError("label outside [0, num_classes)");
}

Dataset make_synthetic_dataset(CsrGraph graph, Index feature_dim, Index num_classes,
                               std::uint64_t seed) {
  if (feature_dim < 1 || num_classes < 1) throw ContractError("feature_dim and num_classes must be >= 1");
  const Index n = graph.num_nodes;
  Rng rng(derive_seed(seed, "features"));
  FeatureMatrix<double> x(n, feature_dim);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < feature_dim; ++j) x(i, j) = rng.uniform(-1.0, 1.0);

  Rng probe_rng(derive_seed(seed, "labels"));
  Eigen::MatrixXd probe(feature_dim, num_classes);
  for (Index i = 0; i < feature_dim; ++i)
    for (Index j = 0; j < num_classes; ++j) probe(i, j) = probe_rng.uniform(-1.0, 1.0);

  // Smooth features over the closed neighbourhood before probing.
  FeatureMatrix<double> smooth = FeatureMatrix<double>::Zero(n, feature_dim);
  for (Index u = 0; u < n; ++u) {
    smooth.row(u) = x.row(u);
    for (Index v : graph.neighbors(u)) smooth.row(u) += x.row(v);
  }
  const Eigen::MatrixXd scores = smooth * probe;

  Dataset d;
  d.labels.resize(static_cast<std::size_t>(n));
  for (Index u = 0; u < n; ++u) {
    Index best = 0;
    scores.row(u).maxCoeff(&best);
    d.labels[u] = best;
  }
  d.graph = std::move(graph);
  d.features = std::move(x);
  d.num_classes = num_classes;
  return d;
}

}  // namespace mixlab
