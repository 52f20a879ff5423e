#include "mixlab/reports.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace mixlab {

using nlohmann::json;

double AnalysisCell::max_balance_ratio() const {
  double r = 1.0;
  for (const auto& [name, b] : balance) r = std::max(r, b.ratio);
  return r;
}

Index AnalysisCell::memory_total_bytes() const {
  Index t = 0;
  for (const auto& [name, m] : memory) t += m.total_bytes;
  return t;
}

Index AnalysisCell::memory_max_bytes() const {
  Index t = 0;
  for (const auto& [name, m] : memory) t = std::max(t, m.max_bytes);
  return t;
}

std::string to_json(const AnalysisCell& cell) {
  json j;
  j["scheme"] = cell.scheme;
  j["m"] = cell.m;
  j["element_bytes"] = cell.comm.element_bytes;
  json layers = json::array();
  for (const auto& l : cell.comm.per_layer) layers.push_back({{"fwd_elems", l.fwd_elems}, {"bwd_elems", l.bwd_elems}});
  j["per_layer"] = layers;
  j["totals"] = {{"fwd_elems", cell.comm.fwd_elems()},
                 {"bwd_elems", cell.comm.bwd_elems()},
                 {"elems", cell.comm.total_elems()},
                 {"bytes", cell.comm.total_bytes()},
                 {"weight_sync_elems", cell.comm.weight_sync_elems}};
  j["per_worker"] = cell.comm.per_worker;
  json balance = json::object();
  for (const auto& [name, b] : cell.balance)
    balance[name] = {{"per_worker_flops", b.per_worker}, {"max", b.max()}, {"total", b.total()}, {"ratio", b.ratio}};
  j["balance"] = balance;
  json memory = json::object();
  for (const auto& [name, m] : cell.memory)
    memory[name] = {{"per_worker_bytes", m.per_worker}, {"max_bytes", m.max_bytes}, {"total_bytes", m.total_bytes}};
  j["memory"] = memory;
  return j.dump(2) + "\n";
}

namespace {

std::string format_ratio(double num, double den) {
  if (den == 0.0) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", num / den);
  return buf;
}

template <typename Metric>
double baseline(const std::vector<AnalysisCell>& cells, Metric metric) {
  for (const char* scheme : {"pp-random", "pp-bfs"}) {
    const AnalysisCell* best = nullptr;
    for (const auto& c : cells)
      if (c.scheme == scheme && metric(c) != 0 && (!best || c.m < best->m)) best = &c;
    if (best) return static_cast<double>(metric(*best));
  }
  return 0.0;
}

}  // namespace

void write_analysis_csv(std::ostream& out, const std::vector<AnalysisCell>& cells) {
  auto comm = [](const AnalysisCell& c) { return c.comm.total_elems(); };
  auto mem = [](const AnalysisCell& c) { return c.memory_total_bytes(); };
  const double comm_base = baseline(cells, comm);
  const double mem_base = baseline(cells, mem);
  out << "scheme,m,comm_elems,comm_bytes,comm_norm,memory_total_bytes,memory_max_bytes,memory_norm,"
         "balance_ratio\n";
  for (const auto& c : cells) {
    char ratio[64];
    std::snprintf(ratio, sizeof ratio, "%.6f", c.max_balance_ratio());
    out << c.scheme << ',' << c.m << ',' << c.comm.total_elems() << ',' << c.comm.total_bytes() << ','
        << format_ratio(static_cast<double>(comm(c)), comm_base) << ',' << c.memory_total_bytes() << ','
        << c.memory_max_bytes() << ',' << format_ratio(static_cast<double>(mem(c)), mem_base) << ',' << ratio
        << '\n';
  }
}

std::string to_json(const StageTable& table) {
  json j;
  j["nodes"] = table.num_nodes;
  j["bandwidth"] = table.bandwidth;
  j["min_stages"] = table.min_stages;
  j["not_fully_pipelinable"] = table.not_fully_pipelinable;
  j["sufficiency_holds"] = table.sufficiency_holds();
  json rows = json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"s", r.s},
                    {"sparse_idle", r.sparse_idle},
                    {"dense_idle", r.dense_idle},
                    {"makespan", r.makespan},
                    {"bound_satisfied", r.bound_satisfied},
                    {"sufficiency_violated", r.sufficiency_violated}});
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

std::string summary_json(const BatchSchedule& schedule, const PipelineTimeline& t, const PipelineOptions& options) {
  json j;
  j["nodes"] = schedule.num_nodes;
  j["batches"] = schedule.num_batches;
  j["layers"] = options.layers;
  j["sparse_latency"] = options.sparse_latency;
  j["dense_latency"] = options.dense_latency;
  j["dep"] = schedule.dep;
  j["sparse_idle"] = t.sparse_idle;
  j["dense_idle"] = t.dense_idle;
  j["makespan"] = t.makespan;
  return j.dump(2) + "\n";
}

std::string to_json(const CycleEstimate& e) {
  json j;
  j["cycles"] = e.cycles;
  j["compute_cycles"] = e.compute_cycles;
  j["memory_cycles"] = e.memory_cycles;
  j["bound"] = to_string(e.bound);
  return j.dump(2) + "\n";
}

std::string trace_to_json(const std::vector<double>& trace) {
  json j = json::array();
  for (double v : trace) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    j.push_back(buf);
  }
  return j.dump(1) + "\n";
}

std::vector<double> trace_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("trace: ") + e.what());
  }
  if (!j.is_array()) throw FormatError("trace must be a JSON array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (v.is_number()) {
      out.push_back(v.get<double>());
      continue;
    }
    if (!v.is_string()) throw FormatError("trace entries must be hex-float strings");
    const std::string s = v.get<std::string>();
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw FormatError("bad trace entry: " + s);
    out.push_back(d);
  }
  return out;
}

void save_trace(const std::filesystem::path& path, const std::vector<double>& trace) {
  write_text(path, trace_to_json(trace));
}

std::vector<double> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return trace_from_json(ss.str());
}

double max_abs_deviation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double dev = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    if (std::isnan(d)) return std::numeric_limits<double>::infinity();
    dev = std::max(dev, d);
  }
  return dev;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace mixlab
