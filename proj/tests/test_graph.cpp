#include "mixlab/generators.hpp"
#include "mixlab/graph.hpp"
#include "mixlab/io.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace mixlab;

namespace {

CsrGraph parse(const std::string& text, bool symmetric = true) {
  std::istringstream in(text);
  return load_edge_list(in, symmetric);
}

CsrGraph random_graph(Index n, double p, std::uint64_t seed) {
  return gen_synthetic(GraphKind::ErdosRenyi, {.n = n, .p = p}, seed);
}

}  // namespace

TEST_CASE("edge list closes under reversal") {
  const auto g = parse("0\t1\n1\t2\n");
  CHECK(g.num_nodes == 3);
  CHECK(g.nnz() == 4);
  CHECK(g.row_offsets == std::vector<Index>{0, 1, 3, 4});
  CHECK(g.col_indices == std::vector<Index>{1, 0, 2, 1});
  CHECK(g.symmetric);
}

TEST_CASE("edge list edge cases") {
  SUBCASE("empty file") {
    const auto g = parse("");
    CHECK(g.num_nodes == 0);
    CHECK(g.nnz() == 0);
  }
  SUBCASE("duplicates collapse") {
    const auto g = parse("0\t1\n0\t1\n");
    CHECK(g.nnz() == 2);
    CHECK(undirected_edge_count(g) == 1);
  }
  SUBCASE("self-loops preserved") {
    const auto g = parse("0\t0\n0\t1\n");
    CHECK(count_self_loops(g) == 1);
    CHECK(g.neighbors(0).size() == 2);
  }
  SUBCASE("directed load") {
    const auto g = parse("0\t1\n", false);
    CHECK(g.nnz() == 1);
    CHECK_FALSE(g.symmetric);
  }
  SUBCASE("malformed line reports its number") {
    try {
      parse("0\t1\n# comment\nx\t2\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("declared node count range-checks ids") {
    CHECK_THROWS_AS(parse("# nodes 2\n0\t2\n"), RangeError);
    const auto g = parse("# nodes 5\n0\t1\n");
    CHECK(g.num_nodes == 5);
  }
}

TEST_CASE("from_edges rejects ids outside the node range") {
  CHECK_THROWS_AS(from_edges(2, {{0, 2}}, true), RangeError);
  CHECK_THROWS_AS(from_edges(2, {{-1, 0}}, true), RangeError);
}

TEST_CASE("validate catches broken invariants") {
  auto g = path_graph(4);
  validate(g);
  auto bad = g;
  bad.col_indices[0] = 7;
  CHECK_THROWS_AS(validate(bad), ContractError);
  bad = g;
  bad.row_offsets.back() = 1;
  CHECK_THROWS_AS(validate(bad), ContractError);
  bad = normalize(g);
  (*bad.values)[0] = -1.0;
  CHECK_THROWS_AS(validate(bad), ContractError);
}

TEST_CASE("normalize small cases") {
  SUBCASE("single isolated node") {
    const auto a = normalize(from_edges(1, {}, true));
    CHECK(a.nnz() == 1);
    CHECK((*a.values)[0] == 1.0);
  }
  SUBCASE("path of four") {
    const auto a = oracle::dense(normalize(path_graph(4)));
    CHECK(a(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
    CHECK(a(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("triangle") {
    const auto a = oracle::dense(normalize(complete_graph(3)));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(a(i, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("input self-loop merges with identity") {
    const auto with_loop = normalize(from_edges(3, {{0, 0}, {0, 1}, {1, 2}}, true));
    const auto without = normalize(path_graph(3));
    CHECK(with_loop == without);
  }
  SUBCASE("rejects asymmetric or weighted input") {
    CHECK_THROWS_AS(normalize(from_edges(2, {{0, 1}}, false)), ContractError);
    CHECK_THROWS_AS(normalize(normalize(path_graph(3))), ContractError);
  }
}

TEST_CASE("normalize matches the dense oracle on random graphs") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Index n = 1 + static_cast<Index>(seed * 7 % 64);
    const auto g = random_graph(n, 0.15, seed);
    const auto a = normalize(g);
    validate(a);
    CHECK(a.symmetric);
    const double diff = (oracle::dense(a) - oracle::normalized(g)).cwiseAbs().maxCoeff();
    CHECK(diff <= 1e-12);
    // Row identity: sum_v A[u][v] * sqrt(d_v / d_u) = 1.
    for (Index u = 0; u < n; ++u) {
      const double du = static_cast<double>(degree(a, u));
      double s = 0.0;
      for (Index k = a.row_offsets[u]; k < a.row_offsets[u + 1]; ++k)
        s += (*a.values)[k] * std::sqrt(static_cast<double>(degree(a, a.col_indices[k])) / du);
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("degree") {
  CHECK(degree(from_edges(3, {}, true), 1) == 0);
  CHECK(degree(path_graph(3), 1) == 2);
  CHECK(degree(star_graph(5), 0) == 5);
  CHECK(max_degree(star_graph(5)) == 5);
  CHECK_THROWS_AS(degree(path_graph(3), 3), RangeError);
}

TEST_CASE("generators") {
  CHECK(undirected_edge_count(path_graph(4)) == 3);
  const auto c = cycle_graph(12);
  CHECK(undirected_edge_count(c) == 12);
  for (Index v = 0; v < 12; ++v) CHECK(degree(c, v) == 2);
  const auto grid = grid_graph(3, 4);
  CHECK(grid.num_nodes == 12);
  CHECK(undirected_edge_count(grid) == 3 * 3 + 2 * 4);
  CHECK(undirected_edge_count(complete_graph(5)) == 10);

  const auto r1 = gen_synthetic(GraphKind::Rmat, {.scale = 10, .edges = 8 << 10}, 7);
  const auto r2 = gen_synthetic(GraphKind::Rmat, {.scale = 10, .edges = 8 << 10}, 7);
  CHECK(r1 == r2);
  CHECK(r1.num_nodes == 1024);
  CHECK(is_symmetric(r1));
  CHECK(count_self_loops(r1) == 0);
  CHECK_FALSE(r1 == gen_synthetic(GraphKind::Rmat, {.scale = 10, .edges = 8 << 10}, 8));

  CHECK_THROWS_AS(gen_synthetic(GraphKind::Rmat, {.scale = 4, .edges = 10, .a = 0.9}, 1), ContractError);
  CHECK_THROWS_AS(cycle_graph(2), ContractError);

  const auto banded = banded_graph(50, 40, 0.3, 3);
  CHECK(is_symmetric(banded));
  Index b = 0;
  for (Index u = 0; u < banded.num_nodes; ++u)
    for (Index v : banded.neighbors(u)) b = std::max(b, std::abs(u - v));
  CHECK(b == 40);

  CHECK(parse_graph_kind("rmat") == GraphKind::Rmat);
  CHECK(to_string(GraphKind::Grid) == "grid");
  CHECK_THROWS(parse_graph_kind("nope"));
}

TEST_CASE("synthetic dataset") {
  const auto d = make_synthetic_dataset(cycle_graph(12), 5, 3, 11);
  validate(d);
  CHECK(d.features.rows() == 12);
  CHECK(d.features.cols() == 5);
  for (Index y : d.labels) CHECK((y >= 0 && y < 3));
  const auto again = make_synthetic_dataset(cycle_graph(12), 5, 3, 11);
  CHECK(again.features == d.features);
  CHECK(again.labels == d.labels);
  auto bad = d;
  bad.labels[0] = 3;
  CHECK_THROWS_AS(validate(bad), ContractError);
}
