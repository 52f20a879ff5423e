// mixlab command-line front end.
//
// Exit codes: 0 success, 2 invalid input or arguments, 3 a distributed
// training trace deviates from the reference, 1 anything else.

#include "mixlab/cost_model.hpp"
#include "mixlab/generators.hpp"
#include "mixlab/io.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/parallel_exec.hpp"
#include "mixlab/pipeline.hpp"
#include "mixlab/reorder.hpp"
#include "mixlab/reports.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace mixlab;
using nlohmann::json;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitMismatch = 3;

/// Every option a subcommand may use. Options are registered per subcommand;
/// --spec fills whatever was not given explicitly.
struct Settings {
  std::string spec_path;
  std::string graph_path;
  std::string generator;
  bool directed = false;
  Index n = 0, rows = 0, cols = 0, edges = 0, band = 0;
  int scale = 0;
  double p = 0.0;
  std::uint64_t seed = 0;

  std::vector<Index> dims;
  std::vector<std::string> schemes;
  std::vector<Index> workers;
  std::string precision = "f64";
  Index iterations = 10;
  double lr = 0.1;
  double dropout = 0.0;

  std::string input;
  std::string output;
  std::string out_dir;
  std::string features_out;
  std::string graph_out;
  Index classes = 0;

  std::string order = "rcm";
  std::string ordering_file;
  Index batches = 0;
  Index layers = 3;
  Index sparse_latency = 1;
  Index dense_latency = 1;
  bool compare = false;

  Index width = 64;
  double density = 0.5;
  Index repeat = 3;
  std::string accel_path;
};

/// Pairs a spec key with the option that would set it on the command line.
class Overlay {
 public:
  template <typename T>
  CLI::Option* bind(CLI::App* app, const std::string& flags, const std::string& key, T& field,
                    const std::string& help) {
    auto* opt = app->add_option(flags, field, help);
    entries_.push_back({app, key, opt, [&field](const json& v) { field = v.get<T>(); }});
    return opt;
  }
  CLI::Option* flag(CLI::App* app, const std::string& flags, const std::string& key, bool& field,
                    const std::string& help) {
    auto* opt = app->add_flag(flags, field, help);
    entries_.push_back({app, key, opt, [&field](const json& v) { field = v.get<bool>(); }});
    return opt;
  }

  /// Apply spec values for options of `app` absent from the command line.
  void apply(const CLI::App* app, const json& spec) const {
    if (!spec.is_object()) throw FormatError("--spec must hold a JSON object");
    for (const auto& [key, value] : spec.items()) {
      bool known = false;
      for (const auto& e : entries_) {
        if (e.app != app || e.key != key) continue;
        known = true;
        if (e.opt->count() > 0) continue;
        try {
          e.assign(value);
        } catch (const json::exception&) {
          throw FormatError("--spec: wrong type for '" + key + "'");
        }
      }
      if (!known) throw FormatError("--spec: unknown key '" + key + "' for " + app->get_name());
    }
  }

 private:
  struct Entry {
    const CLI::App* app;
    std::string key;
    CLI::Option* opt;
    std::function<void(const json&)> assign;
  };
  std::vector<Entry> entries_;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void add_graph_options(CLI::App* app, Settings& s, Overlay& ov) {
  ov.bind(app, "--graph", "graph", s.graph_path, "Graph file (MXG1 or edge list)");
  ov.bind(app, "--gen", "gen", s.generator, "Generator: path, cycle, grid, star, complete, er, rmat, banded");
  ov.bind(app, "--n", "n", s.n, "Node count (path, cycle, star, complete, er, banded)");
  ov.bind(app, "--rows", "rows", s.rows, "Grid rows");
  ov.bind(app, "--cols", "cols", s.cols, "Grid columns");
  ov.bind(app, "--p", "p", s.p, "Edge probability (er, banded)");
  ov.bind(app, "--scale", "scale", s.scale, "RMAT scale, n = 2^scale");
  ov.bind(app, "--edges", "edges", s.edges, "RMAT edge samples");
  ov.bind(app, "--band", "band", s.band, "Banded graph bandwidth");
  ov.flag(app, "--directed", "directed", s.directed, "Keep edge-list direction");
  ov.bind(app, "--seed", "seed", s.seed, "Root seed for graph, weights, masks and partition streams");
}

CsrGraph make_graph(const Settings& s) {
  if (!s.graph_path.empty() && !s.generator.empty()) throw ContractError("give either --graph or --gen, not both");
  if (!s.graph_path.empty()) return load_graph(s.graph_path, !s.directed);
  if (s.generator.empty()) throw ContractError("a graph is required: --graph <file> or --gen <kind>");
  GenParams params{.n = s.n, .rows = s.rows, .cols = s.cols, .p = s.p, .scale = s.scale, .edges = s.edges,
                   .band = s.band};
  return gen_synthetic(parse_graph_kind(s.generator), params, derive_seed(s.seed, "graph"));
}

Index element_bytes(const std::string& precision) {
  if (precision == "f32") return 4;
  if (precision == "f64") return 8;
  throw ContractError("precision must be f32 or f64");
}

void check_dims(const std::vector<Index>& dims) {
  if (dims.size() < 2) throw ContractError("--dims needs at least two widths");
  for (Index d : dims)
    if (d < 1) throw ContractError("--dims entries must be >= 1");
}

void check_workers(const std::vector<Index>& workers) {
  if (workers.empty()) throw ContractError("--m needs at least one worker count");
  for (Index m : workers)
    if (m < 1) throw ContractError("--m values must be >= 1");
}

std::filesystem::path out_path(const Settings& s, const std::string& name) {
  return std::filesystem::path(s.out_dir) / name;
}

// ---------------------------------------------------------------------------

int cmd_ingest(const Settings& s) {
  if (s.input.empty()) throw ContractError("--input is required");
  const auto g = load_edge_list(std::filesystem::path(s.input), !s.directed);
  if (g.symmetric)
    std::printf("nodes=%lld edges=%lld(undirected)\n", static_cast<long long>(g.num_nodes),
                static_cast<long long>(undirected_edge_count(g)));
  else
    std::printf("nodes=%lld edges=%lld(directed)\n", static_cast<long long>(g.num_nodes),
                static_cast<long long>(g.nnz()));
  std::printf("nnz=%lld\nmax_degree=%lld\nself_loops=%lld\n", static_cast<long long>(g.nnz()),
              static_cast<long long>(max_degree(g)), static_cast<long long>(count_self_loops(g)));
  if (!s.output.empty()) {
    save_csr(std::filesystem::path(s.output), g);
    std::printf("wrote %s\n", s.output.c_str());
  }
  return 0;
}

int cmd_gen(const Settings& s) {
  const auto g = make_graph(s);
  std::printf("nodes=%lld nnz=%lld bandwidth=%lld\n", static_cast<long long>(g.num_nodes),
              static_cast<long long>(g.nnz()), static_cast<long long>(bandwidth(g)));
  if (!s.output.empty()) save_csr(std::filesystem::path(s.output), g);
  if (!s.features_out.empty()) {
    if (s.dims.empty() || s.classes < 1) throw ContractError("--features-out needs --dims <d> and --classes");
    const auto data = make_synthetic_dataset(g, s.dims.front(), s.classes, s.seed);
    save_features(s.features_out, data.features);
  }
  return 0;
}

int cmd_analyze(const Settings& s) {
  check_dims(s.dims);
  check_workers(s.workers);
  if (s.schemes.empty()) throw ContractError("--schemes needs at least one scheme");
  const auto g = make_graph(s);
  const Index eb = element_bytes(s.precision);
  std::vector<AnalysisCell> cells;
  for (const auto& scheme : s.schemes) {
    for (Index m : s.workers) {
      AnalysisCell cell;
      cell.scheme = scheme;
      cell.m = m;
      if (scheme == "pp-random" || scheme == "pp-bfs") {
        const auto plan = scheme == "pp-random" ? partition_random(g, m, derive_seed(s.seed, "partition"))
                                                : partition_bfs(g, m);
        cell.comm = pp_comm_volume(g, plan, s.dims, eb);
        cell.balance = {{"workers", pp_flops(g, plan, s.dims)}};
        cell.memory = {{"workers", pp_memory(g, plan, s.dims, eb)}};
      } else if (scheme == "mop" || scheme == "mop-colocated") {
        cell.comm = mop_comm_volume(g.num_nodes, s.dims, m, eb, scheme == "mop-colocated");
        const auto f = mop_flops(g, s.dims, m);
        const auto mem = mop_memory(g.num_nodes, s.dims, m, eb);
        cell.balance = {{"aggregation", f.aggregation}, {"update", f.update}};
        cell.memory = {{"aggregation", mem.aggregation}, {"update", mem.update}};
      } else {
        throw ContractError("unknown scheme '" + scheme + "' (pp-random, pp-bfs, mop, mop-colocated)");
      }
      cell.comm.scheme = scheme;
      std::printf("%-14s m=%-3lld comm=%lld elems  memory=%lld B  balance=%.4f\n", scheme.c_str(),
                  static_cast<long long>(m), static_cast<long long>(cell.comm.total_elems()),
                  static_cast<long long>(cell.memory_total_bytes()), cell.max_balance_ratio());
      if (!s.out_dir.empty()) write_text(out_path(s, scheme + "_m" + std::to_string(m) + ".json"), to_json(cell));
      cells.push_back(std::move(cell));
    }
  }
  if (!s.out_dir.empty()) {
    std::ostringstream csv;
    write_analysis_csv(csv, cells);
    write_text(out_path(s, "analysis.csv"), csv.str());
  }
  return 0;
}

template <typename Scalar>
int run_trainsim(const Settings& s, const CsrGraph& g) {
  const Index classes = s.dims.back();
  const auto data = make_synthetic_dataset(g, s.dims.front(), classes, s.seed);
  const auto model = cast_model<Scalar>(init_model<double>(s.dims, s.dropout, s.seed));
  const TrainConfig cfg{.iterations = s.iterations, .learning_rate = s.lr,
                        .precision = std::is_same_v<Scalar, float> ? Precision::F32 : Precision::F64};
  const double tolerance = std::is_same_v<Scalar, float> ? 1e-4 : 1e-10;
  const auto a_hat = normalize(g);

  const auto ref = train<Scalar>(model, data, cfg).loss_trace;
  std::printf("reference      final loss %.12g\n", ref.back());
  if (!s.out_dir.empty()) save_trace(out_path(s, "trace_reference.json"), ref);

  bool ok = true;
  for (const auto& scheme : s.schemes) {
    if (scheme == "reference") continue;
    for (Index m : s.workers) {
      ParallelRun<Scalar> run;
      if (scheme == "pp-random")
        run = pp_execute<Scalar>(a_hat, partition_random(g, m, derive_seed(s.seed, "partition")), model, data, cfg);
      else if (scheme == "pp-bfs")
        run = pp_execute<Scalar>(a_hat, partition_bfs(g, m), model, data, cfg);
      else if (scheme == "mop")
        run = mop_execute<Scalar>(a_hat, mop_plan(g.num_nodes, model.dims, m), model, data, cfg);
      else
        throw ContractError("unknown scheme '" + scheme + "' (reference, pp-random, pp-bfs, mop)");
      const double dev = max_abs_deviation(run.loss_trace, ref);
      const bool pass = dev <= tolerance;
      ok = ok && pass;
      std::printf("%-14s m=%-3lld max deviation %.3e  comm/iter %lld elems  %s\n", scheme.c_str(),
                  static_cast<long long>(m), dev, static_cast<long long>(run.comm.total_elems()),
                  pass ? "ok" : "MISMATCH");
      if (!s.out_dir.empty())
        save_trace(out_path(s, "trace_" + scheme + "_m" + std::to_string(m) + ".json"), run.loss_trace);
    }
  }
  std::printf("%s\n", ok ? "equivalent" : "NOT equivalent");
  return ok ? 0 : kExitMismatch;
}

int cmd_trainsim(const Settings& s) {
  check_dims(s.dims);
  check_workers(s.workers);
  if (s.schemes.empty()) throw ContractError("--schemes needs at least one scheme");
  const auto g = make_graph(s);
  if (!g.symmetric) throw ContractError("training needs a symmetric graph");
  if (element_bytes(s.precision) == 4) return run_trainsim<float>(s, g);
  return run_trainsim<double>(s, g);
}

Ordering choose_order(const Settings& s, const CsrGraph& g) {
  if (!s.ordering_file.empty()) {
    auto o = load_ordering(std::filesystem::path(s.ordering_file));
    if (o.size() != g.num_nodes) throw ContractError("ordering file size does not match the graph");
    return o;
  }
  if (s.order == "rcm") return rcm_order(g);
  if (s.order == "identity") return identity_ordering(g.num_nodes);
  throw ContractError("--order must be rcm or identity");
}

int cmd_reorder(const Settings& s) {
  const auto g = make_graph(s);
  const auto o = rcm_order(g);
  const Index n = g.num_nodes;
  const Index before = bandwidth(g);
  const Index after = bandwidth(g, o);
  std::printf("nodes=%lld\nbandwidth_before=%lld\nbandwidth_after=%lld\n", static_cast<long long>(n),
              static_cast<long long>(before), static_cast<long long>(after));
  if (n > 0) {
    std::printf("min_stages_before=%lld\nmin_stages_after=%lld\n", static_cast<long long>(min_stages(n, before)),
                static_cast<long long>(min_stages(n, after)));
    if (not_fully_pipelinable(n, after)) std::printf("not_fully_pipelinable\n");
  }
  if (!s.output.empty()) save_ordering(std::filesystem::path(s.output), o);
  if (!s.graph_out.empty()) save_csr(std::filesystem::path(s.graph_out), apply_ordering(g, o));
  return 0;
}

int cmd_pipeline(const Settings& s) {
  const auto g = make_graph(s);
  if (g.num_nodes < 2) throw ContractError("pipeline needs at least two nodes");
  const auto o = choose_order(s, g);
  const PipelineOptions opts{.layers = s.layers, .sparse_latency = s.sparse_latency, .dense_latency = s.dense_latency};
  const auto table = verify_stage_bound(g, o, opts);
  std::optional<StageTable> base;
  if (s.compare) base = verify_stage_bound(g, identity_ordering(g.num_nodes), opts);

  std::printf("bandwidth=%lld min_stages=%lld%s\n", static_cast<long long>(table.bandwidth),
              static_cast<long long>(table.min_stages), table.not_fully_pipelinable ? " not_fully_pipelinable" : "");
  std::printf("%5s %12s %12s %9s%s\n", "s", "sparse_idle", "dense_idle", "makespan", base ? " identity_idle" : "");
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    std::printf("%5lld %12lld %12lld %9lld", static_cast<long long>(r.s), static_cast<long long>(r.sparse_idle),
                static_cast<long long>(r.dense_idle), static_cast<long long>(r.makespan));
    if (base)
      std::printf(" %13lld", static_cast<long long>(base->rows[i].sparse_idle + base->rows[i].dense_idle));
    std::printf("%s\n", r.sufficiency_violated ? "  VIOLATION" : "");
  }
  std::printf("sufficiency %s\n", table.sufficiency_holds() ? "holds" : "VIOLATED");
  if (!s.out_dir.empty()) {
    write_text(out_path(s, "stage_table.json"), to_json(table));
    if (s.batches > 0) {
      const auto schedule = build_schedule(g, o, s.batches);
      const auto t = simulate(schedule, opts);
      std::ostringstream csv;
      write_timeline_csv(csv, t);
      write_text(out_path(s, "timeline.csv"), csv.str());
      write_text(out_path(s, "summary.json"), summary_json(schedule, t, opts));
    }
  }
  return table.sufficiency_holds() ? 0 : kExitMismatch;
}

template <typename Scalar>
int run_kernelbench(const Settings& s, const CsrGraph& g) {
  const auto a = normalize(g);
  const Index n = a.num_nodes;
  Rng rng(derive_seed(s.seed, "features"));
  FeatureMatrix<Scalar> h(n, s.width);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < s.width; ++j) h(i, j) = static_cast<Scalar>(rng.uniform(-1, 1));
  const Bitmask mask = s.density >= 1.0 ? Bitmask::ones(n, s.width)
                       : s.density <= 0.0
                           ? Bitmask::zeros(n, s.width)
                           : make_dropout_mask(n, s.width, 1.0 - s.density, derive_seed(s.seed, "masks"), 0);
  auto time_it = [&](auto&& fn) {
    double best = 1e300;
    KernelResult<Scalar> r;
    for (Index k = 0; k < s.repeat; ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      r = fn();
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return std::pair{std::move(r), best};
  };
  const auto [full, t_full] = time_it([&] { return spmm<Scalar>(a, h); });
  const auto [masked, t_masked] = time_it([&] { return sspmm<Scalar>(a, h, mask); });
  const auto ones = sspmm<Scalar>(a, h, Bitmask::ones(n, s.width));
  std::printf("nodes=%lld nnz=%lld d=%lld density=%.3f threads=%d\n", static_cast<long long>(n),
              static_cast<long long>(a.nnz()), static_cast<long long>(s.width), mask.density(), kernel_threads());
  std::printf("%-6s %14s %14s %10s %10s\n", "kernel", "flops", "bytes", "seconds", "GFLOP/s");
  auto row = [](const char* name, const KernelStats& st, double t) {
    std::printf("%-6s %14lld %14lld %10.6f %10.3f\n", name, static_cast<long long>(st.flops),
                static_cast<long long>(st.bytes_read + st.bytes_written), t, t > 0 ? st.flops / t / 1e9 : 0.0);
  };
  row("spmm", full.stats, t_full);
  row("sspmm", masked.stats, t_masked);
  const bool identical = ones.out == full.out;
  std::printf("all-ones sspmm %s spmm\n", identical ? "==" : "!=");
  return identical ? 0 : kExitMismatch;
}

int cmd_kernelbench(const Settings& s) {
  if (s.width < 1) throw ContractError("--d must be >= 1");
  if (s.repeat < 1) throw ContractError("--repeat must be >= 1");
  if (!(s.density >= 0.0 && s.density <= 1.0)) throw ContractError("--density must be in [0, 1]");
  const auto g = make_graph(s);
  if (element_bytes(s.precision) == 4) return run_kernelbench<float>(s, g);
  return run_kernelbench<double>(s, g);
}

int cmd_costmodel(const Settings& s) {
  const AccelConfig cfg = s.accel_path.empty() ? AccelConfig{} : load_accel_config(s.accel_path);
  cfg.validate();
  const auto g = make_graph(s);
  const auto a = normalize(g);
  const double speedup = fused_speedup(g, s.width, s.density, cfg, s.seed);
  Rng rng(derive_seed(s.seed, "features"));
  FeatureMatrix<float> h(a.num_nodes, s.width);
  for (Index i = 0; i < a.num_nodes; ++i)
    for (Index j = 0; j < s.width; ++j) h(i, j) = static_cast<float>(rng.uniform());
  const auto full = aggregation_cycles(spmm<float>(a, h).stats, cfg);
  const auto sram = sram_check(a.num_nodes, a.nnz(), s.width, cfg);
  std::printf("full_cycles=%.6g bound=%s\n", full.cycles, to_string(full.bound));
  std::printf("fused_speedup=%.9f at density %.3f\n", speedup, s.density);
  std::printf("sram_working_set=%.0f B %s\n", sram.working_set_bytes, sram.fits ? "fits" : "exceeds SRAM");
  if (!s.out_dir.empty()) {
    json j = json::parse(to_json(full));
    j["fused_speedup"] = speedup;
    j["density"] = s.density;
    j["sram_working_set_bytes"] = sram.working_set_bytes;
    j["sram_fits"] = sram.fits;
    write_text(out_path(s, "costmodel.json"), j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixlab: GCN parallelism and pipeline simulator"};
  app.require_subcommand(1);
  Settings s;
  Overlay ov;

  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--spec", s.spec_path, "JSON file of option values; explicit flags win");
    return sub;
  };

  auto* ingest = add("ingest", "Load an edge list, print statistics, store as MXG1");
  ov.bind(ingest, "--input", "input", s.input, "Edge list (u<TAB>v per line)")->required();
  ov.bind(ingest, "--output", "output", s.output, "MXG1 output path");
  ov.flag(ingest, "--directed", "directed", s.directed, "Do not symmetrize");

  auto* gen = add("gen", "Generate a synthetic graph");
  add_graph_options(gen, s, ov);
  ov.bind(gen, "--output", "output", s.output, "MXG1 output path");
  ov.bind(gen, "--features-out", "features_out", s.features_out, "Write synthetic MXF1 features here");
  ov.bind(gen, "--dims", "dims", s.dims, "Feature width (first entry used)");
  ov.bind(gen, "--classes", "classes", s.classes, "Label classes for --features-out");

  auto* analyze = add("analyze", "Communication, memory and balance analytics per scheme and m");
  add_graph_options(analyze, s, ov);
  ov.bind(analyze, "--dims", "dims", s.dims, "Layer widths d0 .. dL");
  ov.bind(analyze, "--schemes", "schemes", s.schemes, "pp-random, pp-bfs, mop, mop-colocated");
  ov.bind(analyze, "--m", "m", s.workers, "Worker counts");
  ov.bind(analyze, "--precision", "precision", s.precision, "f32 or f64 (element width)");
  ov.bind(analyze, "--out", "out", s.out_dir, "Report directory");

  auto* trainsim = add("trainsim", "Train reference and distributed schemes, compare loss traces");
  add_graph_options(trainsim, s, ov);
  ov.bind(trainsim, "--dims", "dims", s.dims, "Layer widths; first is the feature width, last the class count");
  ov.bind(trainsim, "--schemes", "schemes", s.schemes, "reference, pp-random, pp-bfs, mop");
  ov.bind(trainsim, "--m", "m", s.workers, "Worker counts");
  ov.bind(trainsim, "--precision", "precision", s.precision, "f32 or f64");
  ov.bind(trainsim, "--iterations", "iterations", s.iterations, "Training iterations");
  ov.bind(trainsim, "--lr", "lr", s.lr, "Learning rate");
  ov.bind(trainsim, "--dropout", "dropout", s.dropout, "Dropout rate on hidden aggregations");
  ov.bind(trainsim, "--out", "out", s.out_dir, "Directory for loss traces");

  auto* reorder = add("reorder", "Reverse Cuthill-McKee ordering and stage bounds");
  add_graph_options(reorder, s, ov);
  ov.bind(reorder, "--output", "output", s.output, "Ordering file (one node id per line)");
  ov.bind(reorder, "--graph-out", "graph_out", s.graph_out, "Write the relabelled graph as MXG1");

  auto* pipeline = add("pipeline", "Simulate the two-engine pipeline over batch counts");
  add_graph_options(pipeline, s, ov);
  ov.bind(pipeline, "--order", "order", s.order, "rcm or identity");
  ov.bind(pipeline, "--ordering", "ordering", s.ordering_file, "Ordering file, overrides --order");
  ov.bind(pipeline, "--layers", "layers", s.layers, "GCN layers");
  ov.bind(pipeline, "--sparse-latency", "sparse_latency", s.sparse_latency, "Steps per sparse batch");
  ov.bind(pipeline, "--dense-latency", "dense_latency", s.dense_latency, "Steps per dense batch");
  ov.bind(pipeline, "--batches", "batches", s.batches, "Batch count for timeline.csv and summary.json");
  ov.flag(pipeline, "--compare", "compare", s.compare, "Also report identity-order idle");
  ov.bind(pipeline, "--out", "out", s.out_dir, "Report directory");

  auto* kernelbench = add("kernelbench", "Time SpMM and S-SpMM on the normalized graph");
  add_graph_options(kernelbench, s, ov);
  ov.bind(kernelbench, "--d", "d", s.width, "Feature width");
  ov.bind(kernelbench, "--density", "density", s.density, "Output mask density");
  ov.bind(kernelbench, "--precision", "precision", s.precision, "f32 or f64");
  ov.bind(kernelbench, "--repeat", "repeat", s.repeat, "Timed repetitions (best reported)");

  auto* costmodel = add("costmodel", "Roofline cycles and fused S-SpMM speedup");
  add_graph_options(costmodel, s, ov);
  ov.bind(costmodel, "--d", "d", s.width, "Feature width");
  ov.bind(costmodel, "--density", "density", s.density, "Output mask density");
  ov.bind(costmodel, "--accel", "accel", s.accel_path, "Accelerator JSON (adders, sram_bytes, hbm_bytes_per_sec, ...)");
  ov.bind(costmodel, "--out", "out", s.out_dir, "Report directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    // List defaults per subcommand; vector options would append to a preset.
    auto preset = [&](const char* flag, auto& field, auto value) {
      if (auto* opt = sub->get_option_no_throw(flag); opt && opt->count() == 0) field = value;
    };
    using Dims = std::vector<Index>;
    using Names = std::vector<std::string>;
    preset("--dims", s.dims, sub == trainsim ? Dims{16, 16, 4} : Dims{128, 64, 16});
    preset("--schemes", s.schemes, Names{"pp-random", "pp-bfs", "mop"});
    preset("--m", s.workers, Dims{1, 2, 4, 8});
    if (!s.spec_path.empty()) ov.apply(sub, read_json_file(s.spec_path));

    if (sub == ingest) return cmd_ingest(s);
    if (sub == gen) return cmd_gen(s);
    if (sub == analyze) return cmd_analyze(s);
    if (sub == trainsim) return cmd_trainsim(s);
    if (sub == reorder) return cmd_reorder(s);
    if (sub == pipeline) return cmd_pipeline(s);
    if (sub == kernelbench) return cmd_kernelbench(s);
    if (sub == costmodel) return cmd_costmodel(s);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
