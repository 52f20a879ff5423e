#pragma once

#include "mixlab/graph.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace mixlab {

/// perm[p] is the node at position p; inverse[v] is the position of v.
struct Ordering {
  std::vector<Index> perm;
  std::vector<Index> inverse;

  Index size() const { return static_cast<Index>(perm.size()); }
  friend bool operator==(const Ordering&, const Ordering&) = default;
};

Ordering identity_ordering(Index n);

/// Builds the inverse and checks that `perm` is a permutation.
Ordering ordering_from_perm(std::vector<Index> perm);

Ordering invert(const Ordering& o);

/// Reverse Cuthill-McKee. Each component starts from a minimum-degree node
/// refined by two BFS sweeps; neighbours are visited by ascending degree,
/// then id. Components are laid out in ascending order of their smallest id.
Ordering rcm_order(const CsrGraph& g);

/// max |p_u - p_v| over stored edges (0 for an edgeless graph).
Index bandwidth(const CsrGraph& g, const Ordering& o);
Index bandwidth(const CsrGraph& g);

/// (n - b) / (2n).
double min_granularity(Index n, Index b);

/// ceil(2n / (n - b)), the least s with (n - b)/(2n) >= 1/s.
Index min_stages(Index n, Index b);

/// True when min_stages exceeds n, i.e. no batching of single nodes suffices.
bool not_fully_pipelinable(Index n, Index b);

/// Relabel so that node v becomes inverse[v].
CsrGraph apply_ordering(const CsrGraph& g, const Ordering& o);

/// Row p of the result is row perm[p] of `x`.
template <typename Scalar>
FeatureMatrix<Scalar> apply_ordering(const FeatureMatrix<Scalar>& x, const Ordering& o) {
  if (x.rows() != o.size()) throw ContractError("apply_ordering: feature rows must equal ordering size");
  FeatureMatrix<Scalar> out(x.rows(), x.cols());
  for (Index p = 0; p < o.size(); ++p) out.row(p) = x.row(o.perm[p]);
  return out;
}

/// One node id per line in position order.
void save_ordering(std::ostream& out, const Ordering& o);
void save_ordering(const std::filesystem::path& path, const Ordering& o);
Ordering load_ordering(std::istream& in);
Ordering load_ordering(const std::filesystem::path& path);

}  // namespace mixlab
