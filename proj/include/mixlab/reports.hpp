#pragma once

#include "mixlab/cost_model.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/pipeline.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mixlab {

/// One (scheme, m) cell of an analysis sweep. pp schemes report a single
/// "workers" group; MoP reports "aggregation" and "update" groups.
struct AnalysisCell {
  std::string scheme;
  Index m = 0;
  CommReport comm;
  std::vector<std::pair<std::string, BalanceReport>> balance;
  std::vector<std::pair<std::string, MemoryReport>> memory;

  double max_balance_ratio() const;
  Index memory_total_bytes() const;
  Index memory_max_bytes() const;
};

/// {scheme, m, per_layer:[{fwd_elems, bwd_elems}], totals, per_worker,
///  balance, memory}
std::string to_json(const AnalysisCell& cell);

/// One row per cell. Normalized columns divide by the partition-parallel
/// cell with the smallest m whose value is non-zero (pp-random preferred,
/// then pp-bfs); left empty when no such baseline exists.
void write_analysis_csv(std::ostream& out, const std::vector<AnalysisCell>& cells);

std::string to_json(const StageTable& table);
std::string summary_json(const BatchSchedule& schedule, const PipelineTimeline& t, const PipelineOptions& options);
std::string to_json(const CycleEstimate& e);

/// JSON array of hex-float strings, exact round trip.
std::string trace_to_json(const std::vector<double>& trace);
std::vector<double> trace_from_json(const std::string& text);
void save_trace(const std::filesystem::path& path, const std::vector<double>& trace);
std::vector<double> load_trace(const std::filesystem::path& path);

/// Max |a_i - b_i|; infinity when lengths differ.
double max_abs_deviation(const std::vector<double>& a, const std::vector<double>& b);

/// Writes `text` to `path`, replacing any previous contents.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace mixlab
