#pragma once

#include "mixlab/common.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace mixlab {

/// Read-only view of a (possibly rectangular) CSR matrix. Kernels take this
/// so that per-worker sub-matrices and whole graphs share one code path.
struct CsrRef {
  Index rows = 0;
  Index cols = 0;
  std::span<const Index> row_offsets;
  std::span<const Index> col_indices;
  std::span<const double> values;  // empty when the matrix is binary

  bool weighted() const { return !values.empty(); }
  Index nnz() const { return static_cast<Index>(col_indices.size()); }
  Index row_length(Index r) const { return row_offsets[r + 1] - row_offsets[r]; }
};

/// Compressed sparse row adjacency. Houses A, A + I and the normalized
/// propagation matrix. Column indices are strictly increasing within a row.
struct CsrGraph {
  Index num_nodes = 0;
  std::vector<Index> row_offsets{0};
  std::vector<Index> col_indices;
  std::optional<std::vector<double>> values;
  bool symmetric = false;

  Index nnz() const { return static_cast<Index>(col_indices.size()); }
  bool weighted() const { return values.has_value(); }

  std::span<const Index> neighbors(Index v) const {
    return {col_indices.data() + row_offsets[v],
            static_cast<std::size_t>(row_offsets[v + 1] - row_offsets[v])};
  }

  CsrRef ref() const {
    return {num_nodes, num_nodes, row_offsets, col_indices,
            values ? std::span<const double>(*values) : std::span<const double>()};
  }

  friend bool operator==(const CsrGraph&, const CsrGraph&) = default;
};

using Edge = std::pair<Index, Index>;

/// Build a deduplicated, row-sorted CSR from an edge list. With
/// make_symmetric the edge set is closed under reversal. Self-loops are kept.
CsrGraph from_edges(Index num_nodes, std::vector<Edge> edges, bool make_symmetric);

/// Throws ContractError describing the first violated CSR invariant.
void validate(const CsrGraph& g);

/// Transpose-equality check of the edge pattern.
bool is_symmetric(const CsrGraph& g);

/// Row length of v.
Index degree(const CsrGraph& g, Index v);

Index max_degree(const CsrGraph& g);
Index count_self_loops(const CsrGraph& g);

/// Number of undirected edges of a symmetric graph, self-loops counted once.
Index undirected_edge_count(const CsrGraph& g);

/// Weighted propagation matrix D^-1/2 (A + I) D^-1/2. Input self-loops merge
/// with the added identity; isolated nodes get a unit diagonal.
CsrGraph normalize(const CsrGraph& g);

/// Node features, labels and the graph they live on.
struct Dataset {
  CsrGraph graph;
  FeatureMatrix<double> features;
  std::vector<Index> labels;
  Index num_classes = 0;
};

void validate(const Dataset& d);

/// Random features in [-1, 1) with labels taken as the argmax of a random
/// linear probe of the aggregated features, so the task is learnable.
Dataset make_synthetic_dataset(CsrGraph graph, Index feature_dim, Index num_classes,
                               std::uint64_t seed);

}  // namespace mixlab
