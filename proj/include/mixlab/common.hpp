#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mixlab {

using Index = std::int64_t;

/// Dense node x feature array, row-major so a node's features are contiguous.
template <typename Scalar>
using FeatureMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Weight matrix W^(l), shape d^(l+1) x d^(l).
template <typename Scalar>
using WeightMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input text could not be parsed. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, Index line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  Index line() const { return line_; }

 private:
  Index line_;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// A precondition of an operation was violated (shapes, symmetry, sizes).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Binary file is malformed: bad magic, truncated payload.
class FormatError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Counter-based randomness. Every random decision in the project is a pure
// function of (seed, stream, counter) so results never depend on call order,
// worker count or partitioning.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

/// Derive a named sub-stream seed ("graph", "weights", "masks", "partition").
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return hash_combine(seed, h);
}

/// Map 64 random bits to a double in [0, 1).
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Sequential generator on top of splitmix64; cheap and portable so generated
/// graphs and weights are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() { return to_unit(next()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) return 0;
    for (;;) {
      const auto x = next();
      const auto m = static_cast<unsigned __int128>(x) * bound;
      const auto low = static_cast<std::uint64_t>(m);
      if (low >= bound || low >= (-bound) % bound) return static_cast<std::uint64_t>(m >> 64);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace mixlab
