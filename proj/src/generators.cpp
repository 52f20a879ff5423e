#include "mixlab/generators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mixlab {

GraphKind parse_graph_kind(std::string_view name) {
  if (name == "path") return GraphKind::Path;
  if (name == "cycle") return GraphKind::Cycle;
  if (name == "grid") return GraphKind::Grid;
  if (name == "star") return GraphKind::Star;
  if (name == "complete") return GraphKind::Complete;
  if (name == "erdos_renyi" || name == "er") return GraphKind::ErdosRenyi;
  if (name == "rmat") return GraphKind::Rmat;
  if (name == "banded") return GraphKind::Banded;
  throw ContractError("unknown graph kind '" + std::string(name) + "'");
}

std::string_view to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::Path: return "path";
    case GraphKind::Cycle: return "cycle";
    case GraphKind::Grid: return "grid";
    case GraphKind::Star: return "star";
    case GraphKind::Complete: return "complete";
    case GraphKind::ErdosRenyi: return "erdos_renyi";
    case GraphKind::Rmat: return "rmat";
    case GraphKind::Banded: return "banded";
  }
  return "?";
}

CsrGraph path_graph(Index n) {
  if (n < 0) throw ContractError("path: n must be >= 0");
  std::vector<Edge> edges;
  for (Index v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
  return from_edges(n, std::move(edges), true);
}

CsrGraph cycle_graph(Index n) {
  if (n < 3) throw ContractError("cycle: n must be >= 3");
  std::vector<Edge> edges;
  for (Index v = 0; v < n; ++v) edges.emplace_back(v, (v + 1) % n);
  return from_edges(n, std::move(edges), true);
}

CsrGraph grid_graph(Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw ContractError("grid: rows and cols must be >= 1");
  std::vector<Edge> edges;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const Index v = r * cols + c;
      if (c + 1 < cols) edges.emplace_back(v, v + 1);
      if (r + 1 < rows) edges.emplace_back(v, v + cols);
    }
  }
  return from_edges(rows * cols, std::move(edges), true);
}

CsrGraph star_graph(Index leaves) {
  if (leaves < 0) throw ContractError("star: leaf count must be >= 0");
  std::vector<Edge> edges;
  for (Index v = 1; v <= leaves; ++v) edges.emplace_back(0, v);
  return from_edges(leaves + 1, std::move(edges), true);
}

CsrGraph complete_graph(Index n) {
  if (n < 0) throw ContractError("complete: n must be >= 0");
  std::vector<Edge> edges;
  for (Index u = 0; u < n; ++u)
    for (Index v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  return from_edges(n, std::move(edges), true);
}

namespace {

CsrGraph erdos_renyi_graph(Index n, double p, std::uint64_t seed) {
  if (n < 0 || !(p >= 0.0 && p <= 1.0)) throw ContractError("erdos_renyi: need n >= 0, p in [0, 1]");
  Rng rng(seed);
  std::vector<Edge> edges;
  for (Index u = 0; u < n; ++u)
    for (Index v = u + 1; v < n; ++v)
      if (rng.uniform() < p) edges.emplace_back(u, v);
  return from_edges(n, std::move(edges), true);
}

CsrGraph rmat_impl(const GenParams& prm, std::uint64_t seed) {
  if (prm.scale < 0 || prm.scale > 40) throw ContractError("rmat: scale must be in [0, 40]");
  if (prm.edges < 0) throw ContractError("rmat: edge count must be >= 0");
  const double sum = prm.a + prm.b + prm.c + prm.d;
  if (prm.a < 0 || prm.b < 0 || prm.c < 0 || prm.d < 0 || std::abs(sum - 1.0) > 1e-9)
    throw ContractError("rmat: probabilities must be non-negative and sum to 1");

  const Index n = Index{1} << prm.scale;
  Rng rng(seed);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(prm.edges));
  const double ab = prm.a + prm.b;
  const double abc = ab + prm.c;
  for (Index e = 0; e < prm.edges; ++e) {
    Index u = 0;
    Index v = 0;
    for (int level = 0; level < prm.scale; ++level) {
      const double r = rng.uniform();
      u <<= 1;
      v <<= 1;
      if (r < prm.a) {
      } else if (r < ab) {
        v |= 1;
      } else if (r < abc) {
        u |= 1;
      } else {
        u |= 1;
        v |= 1;
      }
    }
    if (u != v) edges.emplace_back(u, v);
  }
  return from_edges(n, std::move(edges), true);
}

}  // namespace

CsrGraph rmat_graph(int scale, Index edges, std::uint64_t seed) {
  GenParams prm;
  prm.scale = scale;
  prm.edges = edges;
  return rmat_impl(prm, seed);
}

CsrGraph banded_graph(Index n, Index band, double p, std::uint64_t seed) {
  if (n < 1 || band < 0 || band >= n) throw ContractError("banded: need 0 <= band < n");
  if (!(p >= 0.0 && p <= 1.0)) throw ContractError("banded: p must be in [0, 1]");
  Rng rng(seed);
  std::vector<Edge> edges;
  for (Index u = 0; u < n; ++u) {
    if (band > 0 && u + band < n) edges.emplace_back(u, u + band);
    for (Index v = u + 1; v < std::min(n, u + band); ++v)
      if (rng.uniform() < p) edges.emplace_back(u, v);
  }
  return from_edges(n, std::move(edges), true);
}

CsrGraph gen_synthetic(GraphKind kind, const GenParams& params, std::uint64_t seed) {
  switch (kind) {
    case GraphKind::Path: return path_graph(params.n);
    case GraphKind::Cycle: return cycle_graph(params.n);
    case GraphKind::Grid: return grid_graph(params.rows, params.cols);
    case GraphKind::Star: return star_graph(params.n - 1);
    case GraphKind::Complete: return complete_graph(params.n);
    case GraphKind::ErdosRenyi: return erdos_renyi_graph(params.n, params.p, seed);
    case GraphKind::Rmat: return rmat_impl(params, seed);
    case GraphKind::Banded: return banded_graph(params.n, params.band, params.p, seed);
  }
  throw ContractError("unknown graph kind");
}

}  // namespace mixlab
