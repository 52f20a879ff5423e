#pragma once

#include "mixlab/graph.hpp"
#include "mixlab/kernels.hpp"

#include <filesystem>
#include <string>

namespace mixlab {

/// Sparse accelerator parameters. Defaults: 16384 fp32 adders, 100 MiB SRAM,
/// 1024 GB/s HBM, 500 MHz.
struct AccelConfig {
  double adders = 16384;
  double sram_bytes = 100.0 * 1024 * 1024;
  double hbm_bytes_per_sec = 1024e9;
  double clock_hz = 500e6;
  double element_bytes = 4;

  void validate() const;
};

/// Reads a JSON object; missing keys keep their defaults.
AccelConfig load_accel_config(const std::filesystem::path& path);
AccelConfig parse_accel_config(const std::string& json_text);

enum class Bound { Compute, Memory };
const char* to_string(Bound b);

struct CycleEstimate {
  double cycles = 0;
  double compute_cycles = 0;
  double memory_cycles = 0;
  Bound bound = Bound::Compute;
};

/// Roofline: compute = adds / adders, memory = bytes * clock / bandwidth.
/// Adds are flops / 2 for weighted adjacency and flops for binary
/// adjacency. Ties report compute-bound.
CycleEstimate aggregation_cycles(const KernelStats& stats, const AccelConfig& cfg);

/// cycles(S-SpMM with an all-ones mask) / cycles(S-SpMM with a random mask of
/// the given density) on the normalized propagation matrix of g with a
/// seeded random n x d feature matrix.
double fused_speedup(const CsrGraph& g, Index d, double mask_density, const AccelConfig& cfg,
                     std::uint64_t seed = 0);

struct SramCheck {
  double working_set_bytes = 0;
  bool fits = true;
};

/// Input and output feature slices plus the adjacency against SRAM capacity.
SramCheck sram_check(Index n, Index nnz, Index d, const AccelConfig& cfg);

}  // namespace mixlab
