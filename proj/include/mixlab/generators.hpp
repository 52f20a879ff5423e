#pragma once

#include "mixlab/graph.hpp"

#include <string_view>

namespace mixlab {

enum class GraphKind { Path, Cycle, Grid, Star, Complete, ErdosRenyi, Rmat, Banded };

GraphKind parse_graph_kind(std::string_view name);
std::string_view to_string(GraphKind kind);

/// Generator parameters; each kind reads only the fields it needs.
///   path/cycle/complete: n          star: n (leaves = n - 1, centre = node 0)
///   grid: rows, cols                erdos_renyi: n, p
///   rmat: scale (n = 2^scale), edges, a, b, c, d
///   banded: n, band, p -- every (u, u + band) edge plus each shorter
///           pair with probability p, so the identity order has bandwidth
///           exactly `band`.
struct GenParams {
  Index n = 0;
  Index rows = 0;
  Index cols = 0;
  double p = 0.0;
  int scale = 0;
  Index edges = 0;
  double a = 0.57;
  double b = 0.19;
  double c = 0.19;
  double d = 0.05;
  Index band = 0;
};

/// Deterministic for a fixed seed; always symmetric and free of self-loops.
CsrGraph gen_synthetic(GraphKind kind, const GenParams& params, std::uint64_t seed = 0);

CsrGraph path_graph(Index n);
CsrGraph cycle_graph(Index n);
CsrGraph grid_graph(Index rows, Index cols);
CsrGraph star_graph(Index leaves);
CsrGraph complete_graph(Index n);
CsrGraph rmat_graph(int scale, Index edges, std::uint64_t seed);
CsrGraph banded_graph(Index n, Index band, double p, std::uint64_t seed);

}  // namespace mixlab
