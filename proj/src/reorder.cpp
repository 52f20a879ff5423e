#include "mixlab/reorder.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace mixlab {
namespace {

Index plain_degree(const CsrGraph& g, Index v) {
  Index d = 0;
  for (Index u : g.neighbors(v))
    if (u != v) ++d;
  return d;
}

/// BFS levels from `root` restricted to unplaced nodes; returns the last level.
std::vector<Index> last_level(const CsrGraph& g, Index root, std::vector<Index>& mark, Index stamp,
                              Index& eccentricity) {
  std::vector<Index> level{root};
  mark[root] = stamp;
  eccentricity = 0;
  while (true) {
    std::vector<Index> next;
    for (Index u : level)
      for (Index v : g.neighbors(u))
        if (mark[v] != stamp && mark[v] != -2) {
          mark[v] = stamp;
          next.push_back(v);
        }
    if (next.empty()) return level;
    level = std::move(next);
    ++eccentricity;
  }
}

}  // namespace

Ordering identity_ordering(Index n) {
  if (n < 0) throw ContractError("ordering size must be non-negative");
  Ordering o;
  o.perm.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) o.perm[i] = i;
  o.inverse = o.perm;
  return o;
}

Ordering ordering_from_perm(std::vector<Index> perm) {
  const Index n = static_cast<Index>(perm.size());
  Ordering o;
  o.inverse.assign(static_cast<std::size_t>(n), -1);
  for (Index p = 0; p < n; ++p) {
    const Index v = perm[p];
    if (v < 0 || v >= n) throw ContractError("ordering entry " + std::to_string(v) + " outside [0, n)");
    if (o.inverse[v] >= 0) throw ContractError("ordering repeats node " + std::to_string(v));
    o.inverse[v] = p;
  }
  o.perm = std::move(perm);
  return o;
}

Ordering invert(const Ordering& o) { return {o.inverse, o.perm}; }

Ordering rcm_order(const CsrGraph& g) {
  const Index n = g.num_nodes;
  if (!is_symmetric(g)) throw ContractError("rcm_order requires a symmetric graph");
  std::vector<Index> degree(static_cast<std::size_t>(n));
  for (Index v = 0; v < n; ++v) degree[v] = plain_degree(g, v);

  // mark: -2 placed, otherwise the stamp of the last BFS that touched it.
  std::vector<Index> mark(static_cast<std::size_t>(n), -1);
  Index stamp = 0;
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  auto by_degree = [&](Index a, Index b) { return degree[a] != degree[b] ? degree[a] < degree[b] : a < b; };

  for (Index seed = 0; seed < n; ++seed) {
    if (mark[seed] == -2) continue;
    Index ecc = 0;
    // Collect the component to find its minimum-degree node.
    std::vector<Index> comp{seed};
    mark[seed] = stamp;
    for (std::size_t k = 0; k < comp.size(); ++k)
      for (Index v : g.neighbors(comp[k]))
        if (mark[v] != stamp) {
          mark[v] = stamp;
          comp.push_back(v);
        }
    ++stamp;
    const Index r = *std::min_element(comp.begin(), comp.end(), by_degree);
    Index ecc_r = 0;
    const auto far = last_level(g, r, mark, stamp++, ecc_r);
    const Index x = *std::min_element(far.begin(), far.end(), by_degree);
    last_level(g, x, mark, stamp++, ecc);
    const Index start = ecc > ecc_r ? x : r;

    const std::size_t first = order.size();
    order.push_back(start);
    mark[start] = -2;
    std::vector<Index> next;
    for (std::size_t k = first; k < order.size(); ++k) {
      next.clear();
      for (Index v : g.neighbors(order[k]))
        if (mark[v] != -2) {
          mark[v] = -2;
          next.push_back(v);
        }
      std::sort(next.begin(), next.end(), by_degree);
      order.insert(order.end(), next.begin(), next.end());
    }
    std::reverse(order.begin() + static_cast<std::ptrdiff_t>(first), order.end());
  }
  return ordering_from_perm(std::move(order));
}

Index bandwidth(const CsrGraph& g, const Ordering& o) {
  if (o.size() != g.num_nodes) throw ContractError("bandwidth: ordering size must equal node count");
  Index b = 0;
  for (Index u = 0; u < g.num_nodes; ++u)
    for (Index v : g.neighbors(u)) b = std::max(b, std::abs(o.inverse[u] - o.inverse[v]));
  return b;
}

Index bandwidth(const CsrGraph& g) { return bandwidth(g, identity_ordering(g.num_nodes)); }

double min_granularity(Index n, Index b) {
  if (n < 1 || b < 0 || b >= n) throw ContractError("granularity needs n >= 1 and 0 <= b < n");
  return static_cast<double>(n - b) / (2.0 * static_cast<double>(n));
}

Index min_stages(Index n, Index b) {
  if (n < 1 || b < 0 || b >= n) throw ContractError("stage bound needs n >= 1 and 0 <= b < n");
  const Index gap = n - b;
  return (2 * n + gap - 1) / gap;
}

bool not_fully_pipelinable(Index n, Index b) { return min_stages(n, b) > n; }

CsrGraph apply_ordering(const CsrGraph& g, const Ordering& o) {
  if (o.size() != g.num_nodes) throw ContractError("apply_ordering: ordering size must equal node count");
  CsrGraph out;
  out.num_nodes = g.num_nodes;
  out.symmetric = g.symmetric;
  out.row_offsets.assign(1, 0);
  if (g.values) out.values.emplace();
  std::vector<std::pair<Index, double>> row;
  for (Index p = 0; p < g.num_nodes; ++p) {
    const Index v = o.perm[p];
    row.clear();
    for (Index k = g.row_offsets[v]; k < g.row_offsets[v + 1]; ++k)
      row.emplace_back(o.inverse[g.col_indices[k]], g.values ? (*g.values)[k] : 0.0);
    std::sort(row.begin(), row.end());
    for (const auto& [c, w] : row) {
      out.col_indices.push_back(c);
      if (out.values) out.values->push_back(w);
    }
    out.row_offsets.push_back(static_cast<Index>(out.col_indices.size()));
  }
  return out;
}

void save_ordering(std::ostream& out, const Ordering& o) {
  for (Index v : o.perm) out << v << '\n';
}

void save_ordering(const std::filesystem::path& path, const Ordering& o) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  save_ordering(out, o);
}

Ordering load_ordering(std::istream& in) {
  std::vector<Index> perm;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    Index v = 0;
    const char* b = line.data() + first;
    const char* e = line.data() + last + 1;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) throw ParseError("expected a node id", line_no);
    perm.push_back(v);
  }
  return ordering_from_perm(std::move(perm));
}

Ordering load_ordering(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return load_ordering(in);
}

}  // namespace mixlab
