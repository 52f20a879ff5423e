#include "mixlab/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace mixlab {
namespace {

constexpr std::array<char, 4> kCsrMagic{'M', 'X', 'G', '1'};
constexpr std::array<char, 4> kFeatureMagic{'M', 'X', 'F', '1'};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_id(std::string_view token, Index& out) {
  if (token.empty()) return false;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && out >= 0;
}

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T)))
    throw FormatError(std::string("truncated file while reading ") + what);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

void expect_magic(std::istream& in, const std::array<char, 4>& magic) {
  std::array<char, 4> got{};
  if (!in.read(got.data(), 4)) throw FormatError("truncated file: missing magic");
  if (got != magic) throw FormatError("bad magic: expected " + std::string(magic.data(), 4));
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

CsrGraph load_edge_list(std::istream& in, bool make_symmetric) {
  std::vector<Edge> edges;
  Index declared = -1;
  Index max_id = -1;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      auto rest = trim(text.substr(1));
      if (rest.starts_with("nodes")) {
        Index n = 0;
        if (!parse_id(trim(rest.substr(5)), n)) throw ParseError("malformed '# nodes' header", line_no);
        declared = n;
      }
      continue;
    }
    const auto split = text.find_first_of(" \t");
    if (split == std::string_view::npos) throw ParseError("expected two node ids", line_no);
    Index u = 0;
    Index v = 0;
    if (!parse_id(text.substr(0, split), u) || !parse_id(trim(text.substr(split + 1)), v))
      throw ParseError("expected two non-negative integer node ids", line_no);
    if (declared >= 0 && (u >= declared || v >= declared))
      throw RangeError("line " + std::to_string(line_no) + ": node id >= declared n=" +
                       std::to_string(declared));
    max_id = std::max({max_id, u, v});
    edges.emplace_back(u, v);
  }
  const Index n = declared >= 0 ? declared : max_id + 1;
  return from_edges(n, std::move(edges), make_symmetric);
}

CsrGraph load_edge_list(const std::filesystem::path& path, bool make_symmetric) {
  auto in = open_in(path);
  return load_edge_list(in, make_symmetric);
}

void save_csr(std::ostream& out, const CsrGraph& g) {
  const bool narrow = static_cast<std::uint64_t>(g.num_nodes) < (1ULL << 32) &&
                      static_cast<std::uint64_t>(g.nnz()) < (1ULL << 32);
  unsigned char flags = 0;
  if (g.weighted()) flags |= kCsrFlagWeighted;
  if (narrow) flags |= kCsrFlagIndex32;

  out.write(kCsrMagic.data(), 4);
  out.put(static_cast<char>(flags));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(g.num_nodes));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(g.nnz()));
  auto put_index = [&](Index x) {
    if (narrow)
      put_le<std::uint32_t>(out, static_cast<std::uint32_t>(x));
    else
      put_le<std::uint64_t>(out, static_cast<std::uint64_t>(x));
  };
  for (Index x : g.row_offsets) put_index(x);
  for (Index x : g.col_indices) put_index(x);
  if (g.values)
    for (double x : *g.values) put_le<float>(out, static_cast<float>(x));
  if (!out) throw Error("write failed");
}

void save_csr(const std::filesystem::path& path, const CsrGraph& g) {
  auto out = open_out(path);
  save_csr(out, g);
}

CsrGraph load_csr(std::istream& in) {
  expect_magic(in, kCsrMagic);
  const auto flags = get_le<std::uint8_t>(in, "flags");
  if (flags & ~(kCsrFlagWeighted | kCsrFlagIndex32)) throw FormatError("unknown flag bits");
  const auto n = get_le<std::uint64_t>(in, "n");
  const auto nnz = get_le<std::uint64_t>(in, "nnz");
  constexpr auto kMax = static_cast<std::uint64_t>(std::numeric_limits<Index>::max() / 16);
  if (n > kMax || nnz > kMax) throw FormatError("header sizes out of range");

  const bool narrow = flags & kCsrFlagIndex32;
  auto get_index = [&](const char* what) -> Index {
    return narrow ? static_cast<Index>(get_le<std::uint32_t>(in, what))
                  : static_cast<Index>(get_le<std::uint64_t>(in, what));
  };

  CsrGraph g;
  g.num_nodes = static_cast<Index>(n);
  // Grow incrementally so a corrupt header cannot force a huge allocation.
  constexpr std::uint64_t kChunk = 1 << 20;
  g.row_offsets.clear();
  g.row_offsets.reserve(std::min(n + 1, kChunk));
  for (std::uint64_t i = 0; i <= n; ++i) g.row_offsets.push_back(get_index("row_offsets"));
  g.col_indices.reserve(std::min(nnz, kChunk));
  for (std::uint64_t i = 0; i < nnz; ++i) g.col_indices.push_back(get_index("col_indices"));
  if (flags & kCsrFlagWeighted) {
    std::vector<double> values;
    values.reserve(std::min(nnz, kChunk));
    for (std::uint64_t i = 0; i < nnz; ++i)
      values.push_back(static_cast<double>(get_le<float>(in, "values")));
    g.values = std::move(values);
  }
  try {
    g.symmetric = false;
    validate(g);
  } catch (const ContractError& e) {
    throw FormatError(std::string("invalid CSR payload: ") + e.what());
  }
  g.symmetric = is_symmetric(g);
  return g;
}

CsrGraph load_csr(const std::filesystem::path& path) {
  auto in = open_in(path);
  return load_csr(in);
}

void save_features(const std::filesystem::path& path, const FeatureMatrix<double>& x) {
  auto out = open_out(path);
  out.write(kFeatureMagic.data(), 4);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(x.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(x.cols()));
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) put_le<float>(out, static_cast<float>(x(i, j)));
  if (!out) throw Error("write failed: " + path.string());
}

FeatureMatrix<double> load_features(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_magic(in, kFeatureMagic);
  const auto rows = get_le<std::uint64_t>(in, "rows");
  const auto cols = get_le<std::uint64_t>(in, "cols");
  if (rows > (1ULL << 40) || cols > (1ULL << 24)) throw FormatError("feature header out of range");
  FeatureMatrix<double> x(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = get_le<float>(in, "features");
  return x;
}

CsrGraph load_graph(const std::filesystem::path& path, bool make_symmetric) {
  {
    auto in = open_in(path);
    std::array<char, 4> head{};
    in.read(head.data(), 4);
    if (in.gcount() == 4 && head == kCsrMagic) {
      in.seekg(0);
      return load_csr(in);
    }
  }
  return load_edge_list(path, make_symmetric);
}

}  // namespace mixlab
