#pragma once

#include "mixlab/graph.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace mixlab {

/// Dense binary matrix packed 64 bits per word, row-major bit order.
/// Pad bits past rows*cols are always zero.
class Bitmask {
 public:
  Bitmask() = default;
  Bitmask(Index rows, Index cols, bool fill = false)
      : rows_(rows), cols_(cols), words_(static_cast<std::size_t>((rows * cols + 63) / 64), 0) {
    if (rows < 0 || cols < 0) throw ContractError("negative bitmask shape");
    if (fill) set_all();
  }

  static Bitmask ones(Index rows, Index cols) { return Bitmask(rows, cols, true); }
  static Bitmask zeros(Index rows, Index cols) { return Bitmask(rows, cols, false); }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return rows_ * cols_; }

  bool test(Index i, Index j) const {
    const Index bit = i * cols_ + j;
    return (words_[bit >> 6] >> (bit & 63)) & 1ULL;
  }
  void set(Index i, Index j, bool value = true) {
    const Index bit = i * cols_ + j;
    const auto flag = 1ULL << (bit & 63);
    if (value)
      words_[bit >> 6] |= flag;
    else
      words_[bit >> 6] &= ~flag;
  }

  Index count_ones() const {
    Index total = 0;
    for (auto w : words_) total += std::popcount(w);
    return total;
  }
  Index count_zeros() const { return size() - count_ones(); }
  double density() const { return size() == 0 ? 1.0 : static_cast<double>(count_ones()) / size(); }
  std::span<const std::uint64_t> words() const { return words_; }
  Index storage_bytes() const { return (size() + 7) / 8; }

  friend bool operator==(const Bitmask&, const Bitmask&) = default;

 private:
  void set_all() {
    std::fill(words_.begin(), words_.end(), ~0ULL);
    if (const auto tail = size() & 63; tail != 0 && !words_.empty()) words_.back() = (1ULL << tail) - 1;
  }

  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Work and traffic of one kernel call. Multiply-adds count as two flops;
/// on a binary adjacency only additions are performed and counted
/// (adds_only is then set). Byte traffic assumes 32-bit CSR indices, the
/// kernel's scalar width for values and features, and packed mask bits.
struct KernelStats {
  Index flops = 0;
  Index bytes_read = 0;
  Index bytes_written = 0;
  Index outputs_skipped = 0;
  bool adds_only = false;

  KernelStats& operator+=(const KernelStats& o) {
    flops += o.flops;
    bytes_read += o.bytes_read;
    bytes_written += o.bytes_written;
    outputs_skipped += o.outputs_skipped;
    return *this;
  }
  friend bool operator==(const KernelStats&, const KernelStats&) = default;
};

inline constexpr Index kIndexBytes = 4;

/// Worker threads for kernels, from MIXLAB_THREADS (default 1).
inline int kernel_threads() {
  if (const char* env = std::getenv("MIXLAB_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return std::min(t, 256);
  }
  return 1;
}

namespace detail {

/// Run fn(begin, end, chunk) over disjoint row ranges. Outputs only depend on
/// the row, so results are identical for any thread count.
template <typename Fn>
void for_row_chunks(Index rows, int chunks, Fn&& fn) {
  chunks = static_cast<int>(std::clamp<Index>(chunks, 1, std::max<Index>(rows / 256, 1)));
  if (chunks == 1) {
    fn(Index{0}, rows, 0);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(chunks - 1));
  for (int c = 1; c < chunks; ++c)
    pool.emplace_back([&, c] { fn(rows * c / chunks, rows * (c + 1) / chunks, c); });
  fn(Index{0}, rows / chunks, 0);
}

inline Index adjacency_bytes(const CsrRef& a, Index scalar_bytes) {
  return (a.rows + 1 + a.nnz()) * kIndexBytes + (a.weighted() ? a.nnz() * scalar_bytes : 0);
}

inline Index output_flops(const CsrRef& a, Index row) {
  const Index len = a.row_length(row);
  if (a.weighted()) return 2 * len;
  return len > 0 ? len - 1 : 0;
}

/// out = sum_k a[row][k] * h[k][col], ascending k.
template <typename Scalar, typename Matrix>
Scalar row_dot(const CsrRef& a, Index row, const Matrix& h, Index col) {
  Scalar acc{0};
  const Index begin = a.row_offsets[row];
  const Index end = a.row_offsets[row + 1];
  if (a.weighted()) {
    for (Index k = begin; k < end; ++k)
      acc += static_cast<Scalar>(a.values[k]) * h(a.col_indices[k], col);
  } else {
    for (Index k = begin; k < end; ++k) acc += h(a.col_indices[k], col);
  }
  return acc;
}

}  // namespace detail

template <typename Scalar>
struct KernelResult {
  FeatureMatrix<Scalar> out;
  KernelStats stats;
};

/// SpMM: out = A * H with per-element ascending-k accumulation.
template <typename Scalar>
KernelResult<Scalar> spmm(const CsrRef& a, const FeatureMatrix<Scalar>& h) {
  if (h.rows() != a.cols)
    throw ContractError("spmm: H has " + std::to_string(h.rows()) + " rows, A has " +
                        std::to_string(a.cols) + " columns");
  const Index cols = h.cols();
  constexpr Index sb = sizeof(Scalar);
  KernelResult<Scalar> r{FeatureMatrix<Scalar>(a.rows, cols), {}};
  const int threads = kernel_threads();
  std::vector<KernelStats> part(static_cast<std::size_t>(threads));
  detail::for_row_chunks(a.rows, threads, [&](Index begin, Index end, int chunk) {
    KernelStats& s = part[chunk];
    for (Index i = begin; i < end; ++i) {
      for (Index j = 0; j < cols; ++j) r.out(i, j) = detail::row_dot<Scalar>(a, i, h, j);
      s.flops += detail::output_flops(a, i) * cols;
      s.bytes_read += a.row_length(i) * cols * sb;
    }
  });
  for (const auto& s : part) r.stats += s;
  r.stats.adds_only = !a.weighted();
  r.stats.bytes_read += detail::adjacency_bytes(a, sb);
  r.stats.bytes_written = a.rows * cols * sb;
  return r;
}

template <typename Scalar>
KernelResult<Scalar> spmm(const CsrGraph& a, const FeatureMatrix<Scalar>& h) {
  return spmm<Scalar>(a.ref(), h);
}

/// S-SpMM: out = (A * H) masked by M. Masked-out outputs are never computed;
/// mask-on outputs are multiplied by `scale` (inverted dropout) when it is
/// not 1.
template <typename Scalar>
KernelResult<Scalar> sspmm(const CsrRef& a, const FeatureMatrix<Scalar>& h, const Bitmask& m,
                           Scalar scale = Scalar{1}) {
  if (h.rows() != a.cols)
    throw ContractError("sspmm: H has " + std::to_string(h.rows()) + " rows, A has " +
                        std::to_string(a.cols) + " columns");
  if (m.rows() != a.rows || m.cols() != h.cols())
    throw ContractError("sspmm: mask shape " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()) + " does not match output " +
                        std::to_string(a.rows) + "x" + std::to_string(h.cols()));
  const Index cols = h.cols();
  constexpr Index sb = sizeof(Scalar);
  const bool scaled = scale != Scalar{1};
  KernelResult<Scalar> r{FeatureMatrix<Scalar>(a.rows, cols), {}};
  const int threads = kernel_threads();
  std::vector<KernelStats> part(static_cast<std::size_t>(threads));
  detail::for_row_chunks(a.rows, threads, [&](Index begin, Index end, int chunk) {
    KernelStats& s = part[chunk];
    for (Index i = begin; i < end; ++i) {
      const Index per_output = detail::output_flops(a, i);
      const Index gathered = a.row_length(i) * sb;
      for (Index j = 0; j < cols; ++j) {
        if (!m.test(i, j)) {
          r.out(i, j) = Scalar{0};
          ++s.outputs_skipped;
          continue;
        }
        Scalar v = detail::row_dot<Scalar>(a, i, h, j);
        if (scaled) v *= scale;
        r.out(i, j) = v;
        s.flops += per_output;
        s.bytes_read += gathered;
        s.bytes_written += sb;
      }
    }
  });
  for (const auto& s : part) r.stats += s;
  r.stats.adds_only = !a.weighted();
  r.stats.bytes_read += detail::adjacency_bytes(a, sb) + m.storage_bytes();
  return r;
}

template <typename Scalar>
KernelResult<Scalar> sspmm(const CsrGraph& a, const FeatureMatrix<Scalar>& h, const Bitmask& m,
                           Scalar scale = Scalar{1}) {
  return sspmm<Scalar>(a.ref(), h, m, scale);
}

/// SDDMM: for every stored (i, j) of the pattern, dot(B row i, C row j).
/// Returned values are aligned with the pattern's col_indices.
template <typename Scalar>
std::vector<Scalar> sddmm(const CsrRef& pattern, const FeatureMatrix<Scalar>& b,
                          const FeatureMatrix<Scalar>& c) {
  if (b.rows() != pattern.rows || c.rows() != pattern.cols || b.cols() != c.cols())
    throw ContractError("sddmm: need B rows = pattern rows, C rows = pattern cols, B cols = C cols");
  std::vector<Scalar> out(static_cast<std::size_t>(pattern.nnz()));
  for (Index i = 0; i < pattern.rows; ++i) {
    for (Index k = pattern.row_offsets[i]; k < pattern.row_offsets[i + 1]; ++k) {
      const Index j = pattern.col_indices[k];
      Scalar acc{0};
      for (Index f = 0; f < b.cols(); ++f) acc += b(i, f) * c(j, f);
      out[k] = acc;
    }
  }
  return out;
}

template <typename Scalar>
std::vector<Scalar> sddmm(const CsrGraph& pattern, const FeatureMatrix<Scalar>& b,
                          const FeatureMatrix<Scalar>& c) {
  return sddmm<Scalar>(pattern.ref(), b, c);
}

/// Position-stable dropout: bit (i, j) is a pure function of
/// (seed, tag, i, j), so any node or feature partition of the matrix sees
/// the same bits as the whole. A bit is 1 (kept) with probability 1 - rate.
struct DropoutMask {
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t tag = 0;

  bool keep(Index i, Index j) const {
    if (rate <= 0.0) return true;
    const auto h = hash_combine(hash_combine(hash_combine(seed, tag), static_cast<std::uint64_t>(i)),
                                static_cast<std::uint64_t>(j));
    return to_unit(h) >= rate;
  }

  /// Mask for the block rows `row_ids` x columns [col_begin, col_end).
  Bitmask block(std::span<const Index> row_ids, Index col_begin, Index col_end) const {
    Bitmask m(static_cast<Index>(row_ids.size()), col_end - col_begin, rate <= 0.0);
    if (rate <= 0.0) return m;
    for (Index r = 0; r < static_cast<Index>(row_ids.size()); ++r)
      for (Index c = col_begin; c < col_end; ++c)
        if (keep(row_ids[r], c)) m.set(r, c - col_begin);
    return m;
  }

  /// Mask for the row range [row_begin, row_end) x [col_begin, col_end).
  Bitmask block(Index row_begin, Index row_end, Index col_begin, Index col_end) const {
    std::vector<Index> ids(static_cast<std::size_t>(row_end - row_begin));
    for (Index r = row_begin; r < row_end; ++r) ids[r - row_begin] = r;
    return block(ids, col_begin, col_end);
  }
};

inline Bitmask make_dropout_mask(Index rows, Index cols, double rate, std::uint64_t seed,
                                 std::uint64_t layer_tag) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ContractError("dropout rate must be in [0, 1)");
  return DropoutMask{rate, seed, layer_tag}.block(0, rows, 0, cols);
}

/// Bit set where z > 0: the ReLU derivative pattern.
template <typename Derived>
Bitmask make_relu_mask(const Eigen::MatrixBase<Derived>& z) {
  Bitmask m(z.rows(), z.cols());
  for (Index i = 0; i < z.rows(); ++i)
    for (Index j = 0; j < z.cols(); ++j)
      if (z(i, j) > 0) m.set(i, j);
  return m;
}

}  // namespace mixlab
