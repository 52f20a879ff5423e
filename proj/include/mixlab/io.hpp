#pragma once

#include "mixlab/graph.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace mixlab {

/// Text edge list: one "u<TAB>v" pair per line, 0-based ids. Blank lines and
/// lines starting with '#' are ignored, except an optional "# nodes <n>"
/// header which fixes the node count and range-checks every id against it.
CsrGraph load_edge_list(std::istream& in, bool make_symmetric);
CsrGraph load_edge_list(const std::filesystem::path& path, bool make_symmetric);

// Binary CSR: "MXG1", flags byte (bit0 weighted, bit1 32-bit indices),
// little-endian u64 n, u64 nnz, row_offsets, col_indices, optional f32 values.
inline constexpr unsigned char kCsrFlagWeighted = 0x1;
inline constexpr unsigned char kCsrFlagIndex32 = 0x2;

void save_csr(std::ostream& out, const CsrGraph& g);
void save_csr(const std::filesystem::path& path, const CsrGraph& g);
CsrGraph load_csr(std::istream& in);
CsrGraph load_csr(const std::filesystem::path& path);

// Binary features: "MXF1", u64 rows, u64 cols, row-major f32.
void save_features(const std::filesystem::path& path, const FeatureMatrix<double>& x);
FeatureMatrix<double> load_features(const std::filesystem::path& path);

/// Load a graph from an MXG1 file or, failing the magic check, an edge list.
CsrGraph load_graph(const std::filesystem::path& path, bool make_symmetric = true);

}  // namespace mixlab
