#include "mixlab/pipeline.hpp"

#include <algorithm>
#include <ostream>

namespace mixlab {

BatchSchedule build_schedule(const CsrGraph& g, const Ordering& o, Index s) {
  const Index n = g.num_nodes;
  if (o.size() != n) throw ContractError("build_schedule: ordering size must equal node count");
  if (s < 1 || s > n)
    throw RangeError("batch count " + std::to_string(s) + " outside [1, " + std::to_string(n) + "]");
  BatchSchedule b;
  b.num_nodes = n;
  b.num_batches = s;
  for (Index k = 0; k <= s; ++k) b.boundaries.push_back(k * n / s);
  b.batch_of.resize(static_cast<std::size_t>(n));
  for (Index k = 0; k < s; ++k)
    for (Index p = b.boundaries[k]; p < b.boundaries[k + 1]; ++p) b.batch_of[p] = k;
  b.dep.resize(static_cast<std::size_t>(s));
  for (Index k = 0; k < s; ++k) {
    Index d = k;
    for (Index p = b.boundaries[k]; p < b.boundaries[k + 1]; ++p)
      for (Index u : g.neighbors(o.perm[p])) d = std::max(d, b.batch_of[o.inverse[u]]);
    b.dep[k] = d;
  }
  return b;
}

namespace {

Index idle_between(const std::vector<EngineTask>& tasks) {
  Index idle = 0;
  for (std::size_t i = 1; i < tasks.size(); ++i) idle += tasks[i].start - tasks[i - 1].end;
  return idle;
}

void check_options(const PipelineOptions& o) {
  if (o.layers < 1) throw ContractError("pipeline needs at least one layer");
  if (o.sparse_latency < 1 || o.dense_latency < 1) throw ContractError("engine latencies must be >= 1");
}

}  // namespace

PipelineTimeline simulate(const BatchSchedule& schedule, const PipelineOptions& options) {
  check_options(options);
  const Index s = schedule.num_batches;
  const Index layers = options.layers;
  PipelineTimeline t;
  std::vector<Index> dense_end_prev;  // previous layer's dense end per batch
  std::vector<Index> sparse_end(static_cast<std::size_t>(s));
  std::vector<Index> dense_end(static_cast<std::size_t>(s));
  Index sparse_free = 0;
  Index dense_free = 0;
  for (Index l = 0; l < layers; ++l) {
    for (Index k = 0; k < s; ++k) {
      const Index ready = l == 0 ? 0 : dense_end_prev[schedule.dep[k]];
      const Index start = std::max(sparse_free, ready);
      sparse_free = start + options.sparse_latency;
      sparse_end[k] = sparse_free;
      t.sparse.push_back({l, k, start, sparse_free});
    }
    for (Index k = 0; k < s; ++k) {
      const Index start = std::max(dense_free, sparse_end[k]);
      dense_free = start + options.dense_latency;
      dense_end[k] = dense_free;
      t.dense.push_back({l, k, start, dense_free});
    }
    dense_end_prev = dense_end;
  }
  t.makespan = std::max(sparse_free, dense_free);
  t.sparse_idle = s == 1 ? 0 : idle_between(t.sparse);
  t.dense_idle = idle_between(t.dense);

  t.steps.resize(static_cast<std::size_t>(t.makespan));
  for (Index step = 0; step < t.makespan; ++step) t.steps[step].step = step;
  for (const auto& task : t.sparse)
    for (Index step = task.start; step < task.end; ++step) {
      t.steps[step].sparse_layer = task.layer;
      t.steps[step].sparse_batch = task.batch;
    }
  for (const auto& task : t.dense)
    for (Index step = task.start; step < task.end; ++step) {
      t.steps[step].dense_layer = task.layer;
      t.steps[step].dense_batch = task.batch;
    }
  return t;
}

bool timeline_valid(const BatchSchedule& schedule, const PipelineTimeline& t, const PipelineOptions& options) {
  const Index s = schedule.num_batches;
  const auto expected = static_cast<std::size_t>(s * options.layers);
  if (t.sparse.size() != expected || t.dense.size() != expected) return false;
  auto index = [&](Index l, Index k) { return static_cast<std::size_t>(l * s + k); };
  for (std::size_t i = 0; i < expected; ++i) {
    const auto& sp = t.sparse[i];
    const auto& de = t.dense[i];
    if (index(sp.layer, sp.batch) != i || index(de.layer, de.batch) != i) return false;
    if (sp.end - sp.start != options.sparse_latency || de.end - de.start != options.dense_latency) return false;
    if (i > 0 && (sp.start < t.sparse[i - 1].end || de.start < t.dense[i - 1].end)) return false;
    if (de.start < sp.end) return false;
    if (sp.layer > 0 && sp.start < t.dense[index(sp.layer - 1, schedule.dep[sp.batch])].end) return false;
  }
  return true;
}

bool StageTable::sufficiency_holds() const {
  return std::none_of(rows.begin(), rows.end(), [](const StageRow& r) { return r.sufficiency_violated; });
}

StageTable verify_stage_bound(const CsrGraph& g, const Ordering& o, const PipelineOptions& options) {
  StageTable table;
  table.num_nodes = g.num_nodes;
  if (g.num_nodes == 0) return table;
  table.bandwidth = bandwidth(g, o);
  table.min_stages = min_stages(g.num_nodes, table.bandwidth);
  table.not_fully_pipelinable = table.min_stages > g.num_nodes;
  const Index top = std::min<Index>(g.num_nodes, 64);
  for (Index s = 2; s <= top; ++s) {
    const auto schedule = build_schedule(g, o, s);
    const auto t = simulate(schedule, options);
    StageRow row;
    row.s = s;
    row.sparse_idle = t.sparse_idle;
    row.dense_idle = t.dense_idle;
    row.makespan = t.makespan;
    row.bound_satisfied = s >= table.min_stages;
    // With unequal latencies only the slower engine is expected to run gap-free.
    const Index watched = options.sparse_latency >= options.dense_latency ? t.sparse_idle : t.dense_idle;
    row.sufficiency_violated = row.bound_satisfied && watched > 0;
    table.rows.push_back(row);
  }
  return table;
}

void write_timeline_csv(std::ostream& out, const PipelineTimeline& t) {
  out << "step,dense_layer,dense_batch,sparse_layer,sparse_batch\n";
  for (const auto& r : t.steps)
    out << r.step << ',' << r.dense_layer << ',' << r.dense_batch << ',' << r.sparse_layer << ','
        << r.sparse_batch << '\n';
}

}  // namespace mixlab
