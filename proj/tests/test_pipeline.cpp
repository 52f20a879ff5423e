#include "mixlab/generators.hpp"
#include "mixlab/pipeline.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace mixlab;

TEST_CASE("build_schedule") {
  SUBCASE("edgeless graph depends only on itself") {
    const auto g = from_edges(10, {}, true);
    const auto b = build_schedule(g, identity_ordering(10), 5);
    CHECK(b.dep == std::vector<Index>{0, 1, 2, 3, 4});
  }
  SUBCASE("path(8), s=4") {
    const auto b = build_schedule(path_graph(8), identity_ordering(8), 4);
    CHECK(b.boundaries == std::vector<Index>{0, 2, 4, 6, 8});
    CHECK(b.dep == std::vector<Index>{1, 2, 3, 3});
  }
  SUBCASE("K_4 any order") {
    const auto b = build_schedule(complete_graph(4), ordering_from_perm({3, 1, 0, 2}), 2);
    CHECK(b.dep[0] == 1);
  }
  SUBCASE("uneven sizes use floor boundaries") {
    const auto b = build_schedule(path_graph(10), identity_ordering(10), 3);
    CHECK(b.boundaries == std::vector<Index>{0, 3, 6, 10});
    CHECK(b.batch_of[9] == 2);
  }
  SUBCASE("range errors") {
    CHECK_THROWS_AS(build_schedule(path_graph(4), identity_ordering(4), 0), RangeError);
    CHECK_THROWS_AS(build_schedule(path_graph(4), identity_ordering(4), 5), RangeError);
  }
}

TEST_CASE("simulate examples") {
  SUBCASE("one batch is serial") {
    const auto b = build_schedule(path_graph(6), identity_ordering(6), 1);
    const auto t = simulate(b, {.layers = 3});
    CHECK(t.sparse_idle == 0);
    CHECK(t.makespan == 6);
    CHECK(timeline_valid(b, t, {.layers = 3}));
  }
  SUBCASE("path(100) with s=3 never stalls") {
    const auto g = path_graph(100);
    const auto b = build_schedule(g, rcm_order(g), 3);
    const auto t = simulate(b);
    CHECK(t.sparse_idle == 0);
    CHECK(t.dense_idle == 0);
    CHECK(t.makespan == 3 * 3 + 1);
  }
  SUBCASE("cycle(12) natural order stalls") {
    const auto b = build_schedule(cycle_graph(12), identity_ordering(12), 3);
    CHECK(b.dep[0] == 2);
    CHECK(simulate(b).sparse_idle > 0);
  }
  SUBCASE("timeline export") {
    const auto b = build_schedule(path_graph(4), identity_ordering(4), 2);
    const auto t = simulate(b, {.layers = 1});
    std::ostringstream out;
    write_timeline_csv(out, t);
    CHECK(out.str() == "step,dense_layer,dense_batch,sparse_layer,sparse_batch\n"
                       "0,-1,-1,0,0\n"
                       "1,0,0,0,1\n"
                       "2,0,1,-1,-1\n");
  }
  SUBCASE("bad options") {
    const auto b = build_schedule(path_graph(4), identity_ordering(4), 2);
    CHECK_THROWS_AS(simulate(b, {.layers = 0}), ContractError);
    CHECK_THROWS_AS(simulate(b, {.sparse_latency = 0}), ContractError);
  }
}

TEST_CASE("simulate agrees with the stepwise oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 80; ++trial) {
    const Index n = 4 + static_cast<Index>(rng.below(60));
    const auto g = gen_synthetic(GraphKind::ErdosRenyi, {.n = n, .p = 2.5 / n}, trial);
    const auto o = trial % 2 == 0 ? identity_ordering(n) : rcm_order(g);
    const Index s = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    const Index layers = 1 + trial % 3;
    const auto b = build_schedule(g, o, s);
    const auto t = simulate(b, {.layers = layers});
    const auto ref = oracle::pipeline_steps(b.dep, layers);
    CHECK(t.sparse_idle == ref.sparse_idle);
    CHECK(t.makespan == ref.makespan);
    CHECK(timeline_valid(b, t, {.layers = layers}));
  }
}

TEST_CASE("timeline_valid rejects broken timelines") {
  const auto b = build_schedule(cycle_graph(12), identity_ordering(12), 3);
  auto t = simulate(b);
  REQUIRE(timeline_valid(b, t));
  // Pull layer 1's first aggregation before its dependency finishes.
  t.sparse[3].start = t.sparse[2].end;
  t.sparse[3].end = t.sparse[3].start + 1;
  CHECK_FALSE(timeline_valid(b, t));
}

TEST_CASE("stage bound sufficiency") {
  const PipelineOptions opts;
  SUBCASE("path(100)") {
    const auto g = path_graph(100);
    const auto table = verify_stage_bound(g, rcm_order(g), opts);
    CHECK(table.min_stages == 3);
    CHECK(table.sufficiency_holds());
    for (const auto& r : table.rows)
      if (r.s >= 3) CHECK(r.sparse_idle == 0);
  }
  SUBCASE("banded graph at b = 0.8n first reaches zero idle at s = 10") {
    const auto g = banded_graph(200, 160, 1.0, 0);
    const auto o = rcm_order(g);
    CHECK(bandwidth(g, o) == 160);
    const auto table = verify_stage_bound(g, o, opts);
    CHECK(table.min_stages == 10);
    CHECK(table.sufficiency_holds());
    Index first_zero = -1;
    for (const auto& r : table.rows)
      if (r.sparse_idle == 0) {
        first_zero = r.s;
        break;
      }
    CHECK(first_zero == 10);
  }
  SUBCASE("star with the centre first is not fully pipelinable") {
    const auto g = star_graph(20);
    const auto table = verify_stage_bound(g, identity_ordering(21), opts);
    CHECK(table.bandwidth == 20);
    CHECK(table.not_fully_pipelinable);
    CHECK(table.sufficiency_holds());
  }
  SUBCASE("random graphs, identity and rcm orders") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const auto g = gen_synthetic(GraphKind::ErdosRenyi, {.n = 40, .p = 0.04}, seed);
      CHECK(verify_stage_bound(g, identity_ordering(40), opts).sufficiency_holds());
      CHECK(verify_stage_bound(g, rcm_order(g), opts).sufficiency_holds());
    }
  }
  SUBCASE("slower dense engine") {
    const auto g = grid_graph(6, 6);
    const PipelineOptions slow{.layers = 2, .sparse_latency = 1, .dense_latency = 3};
    const auto table = verify_stage_bound(g, rcm_order(g), slow);
    CHECK(table.sufficiency_holds());
    for (const auto& r : table.rows) {
      const auto t = simulate(build_schedule(g, rcm_order(g), r.s), slow);
      CHECK(timeline_valid(build_schedule(g, rcm_order(g), r.s), t, slow));
    }
  }
}
