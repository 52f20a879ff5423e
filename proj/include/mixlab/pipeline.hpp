#pragma once

#include "mixlab/reorder.hpp"

#include <iosfwd>
#include <vector>

namespace mixlab {

/// s contiguous batches over ordering positions; batch k covers
/// [floor(k*n/s), floor((k+1)*n/s)). dep[k] is the highest batch holding a
/// neighbour of any node in batch k (at least k itself).
struct BatchSchedule {
  Index num_nodes = 0;
  Index num_batches = 0;
  std::vector<Index> boundaries;
  std::vector<Index> batch_of;  // by position
  std::vector<Index> dep;
};

BatchSchedule build_schedule(const CsrGraph& g, const Ordering& o, Index s);

struct PipelineOptions {
  Index layers = 3;
  Index sparse_latency = 1;
  Index dense_latency = 1;
};

/// One batch on one engine over steps [start, end).
struct EngineTask {
  Index layer = 0;
  Index batch = 0;
  Index start = 0;
  Index end = 0;
};

/// Per-step occupancy; -1 marks an idle engine.
struct StepRecord {
  Index step = 0;
  Index dense_layer = -1;
  Index dense_batch = -1;
  Index sparse_layer = -1;
  Index sparse_batch = -1;
};

struct PipelineTimeline {
  std::vector<EngineTask> sparse;
  std::vector<EngineTask> dense;
  std::vector<StepRecord> steps;
  Index sparse_idle = 0;  // steps between the sparse engine's first start and its last end
  Index dense_idle = 0;
  Index makespan = 0;
};

/// Two-engine greedy schedule. Layer l's sparse pass (aggregation) on batch k
/// waits for the dense pass of layer l-1 on batches up to dep[k]; layer 0
/// aggregates the input and has no dependency. The dense pass of layer l on
/// batch k waits for the sparse pass of layer l on batch k. Both engines
/// process batches in (layer, batch) order. With one batch the sparse idle is
/// reported as 0.
PipelineTimeline simulate(const BatchSchedule& schedule, const PipelineOptions& options = {});

/// Structural checks: each (layer, batch) once per engine, engines never
/// overlap, dependencies honoured.
bool timeline_valid(const BatchSchedule& schedule, const PipelineTimeline& t, const PipelineOptions& options = {});

struct StageRow {
  Index s = 0;
  Index sparse_idle = 0;
  Index dense_idle = 0;
  Index makespan = 0;
  bool bound_satisfied = false;
  bool sufficiency_violated = false;
};

struct StageTable {
  Index num_nodes = 0;
  Index bandwidth = 0;
  Index min_stages = 0;
  bool not_fully_pipelinable = false;
  std::vector<StageRow> rows;

  bool sufficiency_holds() const;
};

/// Simulates s = 2 .. min(n, 64) and compares against the stage bound for
/// the ordering's bandwidth.
StageTable verify_stage_bound(const CsrGraph& g, const Ordering& o, const PipelineOptions& options = {});

/// step,dense_layer,dense_batch,sparse_layer,sparse_batch
void write_timeline_csv(std::ostream& out, const PipelineTimeline& t);

}  // namespace mixlab
