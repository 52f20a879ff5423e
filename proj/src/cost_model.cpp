#include "mixlab/cost_model.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace mixlab {

void AccelConfig::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ContractError(std::string("accelerator ") + name + " must be positive");
  };
  check(adders, "adders");
  check(sram_bytes, "sram_bytes");
  check(hbm_bytes_per_sec, "hbm_bytes_per_sec");
  check(clock_hz, "clock_hz");
  check(element_bytes, "element_bytes");
}

AccelConfig parse_accel_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("accelerator config: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("accelerator config must be a JSON object");
  AccelConfig cfg;
  auto read = [&](const char* key, double& field) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw FormatError(std::string("accelerator config: ") + key + " must be a number");
    field = j[key].get<double>();
  };
  read("adders", cfg.adders);
  read("sram_bytes", cfg.sram_bytes);
  read("hbm_bytes_per_sec", cfg.hbm_bytes_per_sec);
  read("clock_hz", cfg.clock_hz);
  read("element_bytes", cfg.element_bytes);
  cfg.validate();
  return cfg;
}

AccelConfig load_accel_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_accel_config(ss.str());
}

const char* to_string(Bound b) { return b == Bound::Compute ? "compute" : "memory"; }

CycleEstimate aggregation_cycles(const KernelStats& stats, const AccelConfig& cfg) {
  cfg.validate();
  const double flops = static_cast<double>(stats.flops);
  const double adds = stats.adds_only ? flops : flops / 2.0;
  const double bytes = static_cast<double>(stats.bytes_read + stats.bytes_written);
  CycleEstimate e;
  e.compute_cycles = adds / cfg.adders;
  e.memory_cycles = bytes * cfg.clock_hz / cfg.hbm_bytes_per_sec;
  e.bound = e.memory_cycles > e.compute_cycles ? Bound::Memory : Bound::Compute;
  e.cycles = std::max(e.compute_cycles, e.memory_cycles);
  return e;
}

double fused_speedup(const CsrGraph& g, Index d, double mask_density, const AccelConfig& cfg,
                     std::uint64_t seed) {
  if (!(mask_density >= 0.0 && mask_density <= 1.0)) throw ContractError("mask density must be in [0, 1]");
  if (d < 1) throw ContractError("feature width must be >= 1");
  const CsrGraph a_hat = normalize(g);
  const Index n = a_hat.num_nodes;
  Rng rng(derive_seed(seed, "features"));
  FeatureMatrix<float> h(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) h(i, j) = static_cast<float>(rng.uniform());
  const auto full = sspmm<float>(a_hat, h, Bitmask::ones(n, d)).stats;
  const Bitmask mask = mask_density <= 0.0 ? Bitmask::zeros(n, d)
                       : mask_density >= 1.0
                           ? Bitmask::ones(n, d)
                           : make_dropout_mask(n, d, 1.0 - mask_density, derive_seed(seed, "masks"), 0);
  const auto masked = sspmm<float>(a_hat, h, mask).stats;
  const double denom = aggregation_cycles(masked, cfg).cycles;
  const double num = aggregation_cycles(full, cfg).cycles;
  if (denom == 0.0) return num == 0.0 ? 1.0 : INFINITY;
  return num / denom;
}

SramCheck sram_check(Index n, Index nnz, Index d, const AccelConfig& cfg) {
  cfg.validate();
  SramCheck r;
  const double features = 2.0 * static_cast<double>(n) * static_cast<double>(d) * cfg.element_bytes;
  const double adjacency = static_cast<double>(n + 1 + nnz) * 4.0 + static_cast<double>(nnz) * cfg.element_bytes;
  r.working_set_bytes = features + adjacency;
  r.fits = r.working_set_bytes <= cfg.sram_bytes;
  return r;
}

}  // namespace mixlab
