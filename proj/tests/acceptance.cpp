// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include "mixlab/cost_model.hpp"
#include "mixlab/generators.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/parallel_exec.hpp"
#include "mixlab/pipeline.hpp"
#include "mixlab/reorder.hpp"
#include "mixlab/reports.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace mixlab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string fmt(const char* f, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

FeatureMatrix<double> random_features(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix<double> h(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) h(i, j) = rng.uniform(-1, 1);
  return h;
}

Ordering shuffled(Index n, std::uint64_t seed) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  for (Index i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i + 1))]);
  return ordering_from_perm(perm);
}

// 1 -----------------------------------------------------------------------
Outcome numeric_equivalence() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::pair<std::string, CsrGraph>> graphs{
      {"path(8)", path_graph(8)}, {"cycle(12)", cycle_graph(12)}, {"K_4", complete_graph(4)}, {"rmat(2^8)", rmat_graph(8, 2048, 1)}};
  const TrainConfig cfg{.iterations = 10, .learning_rate = 0.2};
  double worst = 0.0;
  for (const auto& [name, g] : graphs) {
    const auto data = make_synthetic_dataset(g, 8, 4, 3);
    const auto model = init_model<double>({8, 16, 4}, 0.5, 7);
    const auto ref = train<double>(model, data, cfg).loss_trace;
    const auto a_hat = normalize(g);
    for (Index m : {1, 2, 4, 8}) {
      std::vector<Index> owner(static_cast<std::size_t>(g.num_nodes));
      for (Index v = 0; v < g.num_nodes; ++v)
        owner[v] = static_cast<Index>(hash_combine(11, static_cast<std::uint64_t>(v)) % static_cast<std::uint64_t>(m));
      const auto pp = pp_execute<double>(a_hat, make_partition_plan(g, owner, m), model, data, cfg);
      const auto mop = mop_execute<double>(a_hat, mop_plan(g.num_nodes, model.dims, m), model, data, cfg);
      const double dp = max_abs_deviation(pp.loss_trace, ref);
      const double dm = max_abs_deviation(mop.loss_trace, ref);
      worst = std::max({worst, dp, dm});
      o.require(dp <= 1e-10, "pp " + name + " m=" + std::to_string(m) + fmt(" dev=%.3g", dp));
      o.require(dm <= 1e-10, "mop " + name + " m=" + std::to_string(m) + fmt(" dev=%.3g", dm));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(secs < 10.0, fmt("runtime %.2f s", secs));
  if (o.pass) o.detail = fmt("max deviation %.3g", worst) + fmt(", %.2f s", secs);
  return o;
}

// 2 -----------------------------------------------------------------------
Outcome mop_constant() {
  Outcome o;
  const auto g = rmat_graph(12, 32768, 2);
  const Index n = g.num_nodes;
  const std::vector<Index> dims{128, 64, 16};
  std::optional<CommReport> first_comm;
  std::optional<MopMemory> first_mem;
  for (Index m : {2, 4, 8, 16}) {
    const auto c = mop_comm_volume(n, dims, m);
    const auto mem = mop_memory(n, dims, m);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l)
      o.require(c.per_layer[l].fwd_elems == n * (dims[l] + dims[l + 1]),
                "forward layer " + std::to_string(l) + " at m=" + std::to_string(m));
    if (!first_comm) {
      first_comm = c;
      first_mem = mem;
      continue;
    }
    o.require(c.per_layer == first_comm->per_layer && c.total_elems() == first_comm->total_elems() &&
                  c.total_bytes() == first_comm->total_bytes(),
              "comm differs at m=" + std::to_string(m));
    o.require(mem.aggregation.total_bytes == first_mem->aggregation.total_bytes &&
                  mem.update.total_bytes == first_mem->update.total_bytes,
              "memory differs at m=" + std::to_string(m));
  }
  if (o.pass) o.detail = "total " + std::to_string(first_comm->total_elems()) + " elems for every m";
  return o;
}

// 3 -----------------------------------------------------------------------
Outcome pp_scales_out() {
  Outcome o;
  const auto g = rmat_graph(12, 32768, 2);
  const std::vector<Index> dims{128, 64, 16};
  std::vector<double> comm, mem;
  for (Index m : {2, 4, 8, 16}) {
    double c = 0, b = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto plan = partition_random(g, m, seed);
      c += static_cast<double>(pp_comm_volume(g, plan, dims).total_elems());
      b += static_cast<double>(pp_memory(g, plan, dims).total_bytes);
    }
    comm.push_back(c / 10);
    mem.push_back(b / 10);
  }
  std::ostringstream d;
  for (std::size_t i = 0; i < comm.size(); ++i) {
    if (i > 0) {
      o.require(comm[i] > comm[i - 1], "comm not strictly increasing");
      o.require(mem[i] >= mem[i - 1], "memory decreased");
    }
    d << (i ? " < " : "mean comm ") << static_cast<long long>(comm[i]);
  }
  if (o.pass) o.detail = d.str();
  return o;
}

// 4 -----------------------------------------------------------------------
Outcome balance() {
  Outcome o;
  const auto g = grid_graph(8, 12);  // n = 96
  const std::vector<std::vector<Index>> dim_sets{{48, 24, 12}, {10, 7, 3}, {64, 32}};
  for (const auto& dims : dim_sets)
    for (Index m = 1; m <= 16; ++m) {
      const auto b = mop_flops(g, dims, m);
      bool divides = 96 % m == 0;
      for (Index d : dims) divides = divides && d % m == 0;
      if (divides) {
        o.require(b.aggregation.ratio == 1.0 && b.update.ratio == 1.0, "ratio != 1 at m=" + std::to_string(m));
        continue;
      }
      // Aggregation flops scale with slice width summed over layers l < L.
      std::vector<Index> widths(static_cast<std::size_t>(m), 0);
      Index total = 0;
      for (std::size_t l = 0; l + 1 < dims.size(); ++l)
        for (Index i = 0; i < m; ++i) {
          const Index w = dims[l] * (i + 1) / m - dims[l] * i / m;
          widths[i] += w;
          total += w;
        }
      const double agg = total == 0 ? 1.0
                                     : static_cast<double>(*std::max_element(widths.begin(), widths.end())) *
                                           static_cast<double>(m) / static_cast<double>(total);
      o.require(std::abs(b.aggregation.ratio - agg) <= 1e-12, "aggregation ratio vs ranges at m=" + std::to_string(m));
      o.require(std::abs(b.update.ratio - oracle::range_ratio(96, m)) <= 1e-12,
                "update ratio vs ranges at m=" + std::to_string(m));
    }
  const auto star = star_graph(63);
  const auto ratio = pp_flops(star, partition_bfs(star, 2), std::vector<Index>{16, 16}).ratio;
  o.require(ratio > 1.5, fmt("star ratio %.4f", ratio));
  if (o.pass) o.detail = fmt("star K_{1,63} BFS ratio %.4f", ratio);
  return o;
}

// 5 -----------------------------------------------------------------------
Outcome scheduling_oracle() {
  Outcome o;
  Rng rng(17);
  double worst = 1.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto k = static_cast<std::size_t>(1 + rng.below(12));
    const auto m = static_cast<Index>(2 + rng.below(3));
    std::vector<double> c(k);
    for (auto& v : c) v = static_cast<double>(1 + rng.below(50));
    const double opt = brute_force_makespan(c, m);
    const double lpt = lpt_makespan(c, m);
    if (k <= 8) o.require(opt == oracle::makespan_enumerate(c, m), "brute force vs enumeration");
    o.require(lpt >= opt, "lpt below optimum");
    o.require(lpt <= (4.0 / 3.0 - 1.0 / (3.0 * static_cast<double>(m))) * opt + 1e-12, "lpt above bound");
    worst = std::max(worst, lpt / opt);
  }
  // Hand-enumerable plans: every owner assignment of a 6-node graph to 2 workers.
  const auto g = from_edges(6, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {3, 4}, {4, 5}}, true);
  const std::vector<Index> dims{3, 5, 2};
  for (int bits = 0; bits < 64; ++bits) {
    std::vector<Index> owner(6);
    for (Index v = 0; v < 6; ++v) owner[v] = (bits >> v) & 1;
    const auto b = pp_flops(g, make_partition_plan(g, owner, 2), dims);
    for (Index i = 0; i < 2; ++i) {
      Index want = 0;
      for (Index v = 0; v < 6; ++v)
        if (owner[v] == i)
          for (std::size_t l = 0; l + 1 < dims.size(); ++l) want += dims[l] * (dims[l + 1] + degree(g, v));
      o.require(b.per_worker[i] == want, "pp_flops per-worker sum");
    }
  }
  if (o.pass) o.detail = fmt("worst lpt/opt %.4f", worst);
  return o;
}

// 6 -----------------------------------------------------------------------
Outcome kernel_correctness() {
  Outcome o;
  Rng rng(6);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(128));
    const Index d = 1 + static_cast<Index>(rng.below(32));
    const double density = std::array{0.0, 0.25, 0.5, 1.0}[trial % 4];
    const auto a = normalize(gen_synthetic(GraphKind::ErdosRenyi, {.n = n, .p = rng.uniform(0.0, 0.2)}, trial));
    const auto h = random_features(n, d, trial);
    Bitmask mask(n, d);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j)
        if (rng.uniform() < density) mask.set(i, j);
    const auto r = sspmm<double>(a, h, mask);
    const auto dense =
        oracle::apply_mask(oracle::dense(a) * Eigen::MatrixXd(h), [&](Index i, Index j) { return mask.test(i, j); });
    const double err = n == 0 ? 0.0 : (Eigen::MatrixXd(r.out) - dense).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
    o.require(err <= 1e-12, fmt("oracle error %.3g", err));
    Index expect_flops = 0;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j)
        if (mask.test(i, j)) expect_flops += 2 * (a.row_offsets[i + 1] - a.row_offsets[i]);
    o.require(r.stats.flops == expect_flops, "flops identity");
    o.require(r.stats.outputs_skipped == mask.count_zeros(), "skipped outputs");
    const auto full = spmm<double>(a, h);
    const auto ones = sspmm<double>(a, h, Bitmask::ones(n, d));
    o.require(ones.out == full.out, "all-ones mask not bit-identical to spmm");
  }
  if (o.pass) o.detail = fmt("max error %.3g", worst);
  return o;
}

// 7 -----------------------------------------------------------------------
Outcome gradient_check() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = gen_synthetic(GraphKind::ErdosRenyi, {.n = 16, .p = 0.25}, seed);
    const auto a = normalize(g);
    const auto x = random_features(16, 5, seed + 100);
    Rng lrng(seed);
    std::vector<Index> labels(16);
    for (auto& y : labels) y = static_cast<Index>(lrng.below(3));
    const auto model = init_model<double>({5, 6, 3}, 0.0, seed);
    const auto cache = model_forward<double>(model, a.ref(), x);
    const auto grads = model_backward<double>(model, a.ref(), cache, loss_and_grad<double>(cache.logits(), labels).dlogits);
    const Eigen::MatrixXd a_dense = oracle::normalized(g);
    std::vector<Eigen::MatrixXd> w;
    for (const auto& m : model.weights) w.emplace_back(m);
    for (std::size_t l = 0; l < 2; ++l)
      for (Index i = 0; i < w[l].rows(); ++i)
        for (Index j = 0; j < w[l].cols(); ++j) {
          const double fd = oracle::fd_weight_gradient(a_dense, x, w, labels, l, i, j, 1e-6);
          const double an = grads.weights[l](i, j);
          // Relative error, with an absolute floor for entries whose gradient vanishes.
          const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
          worst = std::max(worst, rel);
          o.require(rel <= 1e-4, fmt("rel err %.3g", rel) + " seed " + std::to_string(seed));
        }
  }
  if (o.pass) o.detail = fmt("max rel err %.3g", worst);
  return o;
}

// Graphs shared by criteria 8 and 9.
struct PipelineGraph {
  std::string name;
  CsrGraph g;
};

std::vector<PipelineGraph> pipeline_graphs() {
  return {{"path(100)", path_graph(100)},
          {"cycle(64)", cycle_graph(64)},
          {"banded(200, b=160)", banded_graph(200, 160, 1.0, 1)},
          {"grid(10x10)", grid_graph(10, 10)}};
}

// 8 -----------------------------------------------------------------------
Outcome pipeline_proposition() {
  Outcome o;
  std::ostringstream d;
  for (const auto& [name, g] : pipeline_graphs()) {
    const auto order = rcm_order(g);
    const auto table = verify_stage_bound(g, order);
    for (const auto& r : table.rows) {
      const auto schedule = build_schedule(g, order, r.s);
      o.require(timeline_valid(schedule, simulate(schedule)), name + " invalid timeline");
    }
    o.require(table.sufficiency_holds(), name + " idles above the stage bound");
    Index first_zero = -1;
    for (const auto& r : table.rows)
      if (r.sparse_idle == 0) {
        first_zero = r.s;
        break;
      }
    d << name << ": b=" << table.bandwidth << " bound=" << table.min_stages << " first_zero=" << first_zero << "; ";
    if (name.rfind("banded", 0) == 0) {
      o.require(table.bandwidth == 160, "banded bandwidth under RCM is " + std::to_string(table.bandwidth));
      o.require(table.min_stages == 10 && first_zero == 10,
                "banded first zero idle at s=" + std::to_string(first_zero));
    }
  }
  if (o.pass) o.detail = d.str();
  return o;
}

// 9 -----------------------------------------------------------------------
Outcome rcm_quality() {
  Outcome o;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = apply_ordering(path_graph(50), shuffled(50, seed));
    o.require(bandwidth(p, rcm_order(p)) == 1, "scrambled path");
    const auto c = apply_ordering(cycle_graph(40), shuffled(40, seed));
    o.require(bandwidth(c, rcm_order(c)) == 2, "scrambled cycle");
  }
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = rmat_graph(8, 1024, seed);
    if (bandwidth(g, rcm_order(g)) <= bandwidth(g)) ++improved;
  }
  o.require(improved >= 95, "rmat: " + std::to_string(improved) + "/100 not worse");
  for (const auto& [name, g] : pipeline_graphs()) {
    const auto rcm = rcm_order(g);
    const auto id = identity_ordering(g.num_nodes);
    for (Index s = 2; s <= std::min<Index>(g.num_nodes, 64); ++s) {
      const auto tr = simulate(build_schedule(g, rcm, s));
      const auto ti = simulate(build_schedule(g, id, s));
      o.require(tr.sparse_idle + tr.dense_idle <= ti.sparse_idle + ti.dense_idle,
                name + " s=" + std::to_string(s) + ": rcm idles more than identity");
    }
  }
  if (o.pass) o.detail = "rmat not worse in " + std::to_string(improved) + "/100";
  return o;
}

// 10 ----------------------------------------------------------------------
Outcome cost_model() {
  Outcome o;
  const auto g = rmat_graph(14, 1 << 18, 5);
  const Index d = 128;
  AccelConfig cfg;
  cfg.adders = 64;  // small array keeps the estimate compute-bound
  const double one = fused_speedup(g, d, 1.0, cfg, 9);
  o.require(one == 1.0, fmt("density 1 speedup %.17g", one));
  const double half = fused_speedup(g, d, 0.5, cfg, 9);

  // Independent flop count of the same mask: 2 * row length per kept output.
  const auto a = normalize(g);
  const DropoutMask gen{0.5, derive_seed(9, "masks"), 0};
  double kept = 0.0, all = 0.0;
  for (Index i = 0; i < a.num_nodes; ++i) {
    const double len = static_cast<double>(a.row_offsets[i + 1] - a.row_offsets[i]);
    for (Index j = 0; j < d; ++j) {
      all += 2 * len;
      if (gen.keep(i, j)) kept += 2 * len;
    }
  }
  const double flop_ratio = all / kept;
  KernelStats probe;
  probe.flops = static_cast<Index>(kept);
  probe.bytes_read = static_cast<Index>(kept) * 4;
  o.require(aggregation_cycles(probe, cfg).bound == Bound::Compute, "configuration is not compute-bound");
  o.require(std::abs(half - flop_ratio) <= 1e-9, fmt("speedup %.12g", half) + fmt(" vs flop ratio %.12g", flop_ratio));
  if (o.pass) o.detail = fmt("speedup %.9f", half) + fmt(" = flop ratio %.9f", flop_ratio);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"pp/mop loss traces match the reference", numeric_equivalence},
      {"mop communication and memory independent of m", mop_constant},
      {"pp communication grows with m", pp_scales_out},
      {"balance ratios", balance},
      {"lpt vs brute-force makespan", scheduling_oracle},
      {"sspmm vs dense oracle", kernel_correctness},
      {"gradients vs finite differences", gradient_check},
      {"zero idle at the stage bound", pipeline_proposition},
      {"rcm quality", rcm_quality},
      {"cost model sanity", cost_model},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %zu: %s (%s)\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, r.detail.c_str());
    failed += r.pass ? 0 : 1;
  }
  return failed;
}
