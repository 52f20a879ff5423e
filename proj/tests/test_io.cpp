#include "mixlab/generators.hpp"
#include "mixlab/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mixlab;

namespace {

CsrGraph round_trip(const CsrGraph& g) {
  std::stringstream buf;
  save_csr(buf, g);
  return load_csr(buf);
}

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mixlab_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("csr round trip") {
  CHECK(round_trip(path_graph(4)) == path_graph(4));
  CHECK(round_trip(from_edges(0, {}, true)) == from_edges(0, {}, true));

  const auto a = normalize(path_graph(4));
  const auto back = round_trip(a);
  REQUIRE(back.values);
  for (std::size_t k = 0; k < a.values->size(); ++k)
    CHECK((*back.values)[k] == static_cast<double>(static_cast<float>((*a.values)[k])));
  CHECK(round_trip(back) == back);
}

TEST_CASE("csr round trip on random graphs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = gen_synthetic(GraphKind::Rmat, {.scale = 6, .edges = 300}, seed);
    CHECK(round_trip(g) == g);
    const auto directed = from_edges(10, {{0, 3}, {3, 4}, {9, 1}, {2, 2}}, false);
    CHECK(round_trip(directed) == directed);
  }
}

TEST_CASE("csr rejects corrupt input") {
  std::stringstream buf;
  save_csr(buf, path_graph(4));
  std::string bytes = buf.str();

  SUBCASE("bad magic") {
    std::string b = bytes;
    b[0] = 'Z';
    std::istringstream in(b);
    CHECK_THROWS_AS(load_csr(in), FormatError);
  }
  SUBCASE("truncated") {
    for (std::size_t cut : {std::size_t{2}, std::size_t{10}, bytes.size() - 1}) {
      std::istringstream in(bytes.substr(0, cut));
      CHECK_THROWS_AS(load_csr(in), FormatError);
    }
  }
  SUBCASE("huge header does not allocate") {
    std::string b = bytes;
    for (int i = 5; i < 13; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>(0x7f);
    std::istringstream in(b);
    CHECK_THROWS_AS(load_csr(in), FormatError);
  }
  SUBCASE("invalid payload") {
    std::string b = bytes;
    b[b.size() - 1] = 9;  // last column index out of range
    std::istringstream in(b);
    CHECK_THROWS_AS(load_csr(in), FormatError);
  }
}

TEST_CASE("file helpers") {
  const auto csr = temp_path("g.mxg");
  save_csr(csr, cycle_graph(6));
  CHECK(load_graph(csr) == cycle_graph(6));

  const auto txt = temp_path("g.txt");
  {
    std::ofstream out(txt);
    out << "# nodes 4\n0\t1\n1\t2\n2\t3\n";
  }
  CHECK(load_graph(txt) == path_graph(4));

  const auto feat = temp_path("x.mxf");
  FeatureMatrix<double> x(3, 2);
  x << 1, 2, 3.5, -4, 0.25, 6;
  save_features(feat, x);
  CHECK(load_features(feat) == x);

  CHECK_THROWS_AS(load_csr(temp_path("missing.mxg")), Error);
  CHECK_THROWS_AS(load_features(csr), FormatError);
}
