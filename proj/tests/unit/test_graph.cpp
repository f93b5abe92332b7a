#include "common.hpp"

#include "kmsf/errors.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace kmsf;

namespace {

// Reachability by plain DFS, independent of the SCC code.
std::vector<std::vector<char>> reach_matrix(const Graph& g) {
  const std::size_t n = g.vertex_count();
  std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
  for (VertexId s = 0; s < n; ++s) {
    std::vector<VertexId> stack{s};
    r[s][s] = 1;
    while (!stack.empty()) {
      const VertexId v = stack.back();
      stack.pop_back();
      for (ArrowId a : g.out_arrows(v)) {
        const VertexId w = g.arrow(a).range;
        if (!r[s][w]) {
          r[s][w] = 1;
          stack.push_back(w);
        }
      }
    }
  }
  return r;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("fixtures parse and round-trip") {
  for (const char* name : {"cayley_z", "cayley_f2", "ray_const_lambda", "ray_slim", "ray_iii0", "loops2", "cycle3"}) {
    CAPTURE(name);
    const GraphFamily f = fixture(name);
    const GraphFamily g = parse_graph(serialize_graph(f));
    CHECK(same_family(f, g));
    CHECK(serialize_graph(g) == serialize_graph(f));
  }
}

TEST_CASE("inexact potentials survive serialization") {
  const GraphFamily f = parse_graph("[graph]\nkind = cayley-z\nrationals = false\ngen 1 1\ngen -1 sqrt(2)\n");
  const GraphFamily g = parse_graph(serialize_graph(f));
  CHECK(same_family(f, g));
  CHECK(g.z_generators()[1].potential.value() == f.z_generators()[1].potential.value());
}

TEST_CASE("parse errors carry line numbers") {
  try {
    parse_graph("[graph]\nkind = explicit\nrationals = true\nvertex a\narrow a b 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
    CHECK(std::string(e.what()).find("dangling") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_graph("kind = ray\n"), ParseError);
  CHECK_THROWS_AS(parse_graph("[graph]\nkind = torus\n"), ParseError);
  CHECK_THROWS_AS(parse_graph("[graph]\nkind = ray\nrationals = true\nlevel 2 1\ntail = constant\n"), ParseError);
  CHECK_THROWS_AS(parse_graph("[graph]\nkind = ray\nrationals = true\nlevel 1 sqrt(2)\ntail = constant\n"), ParseError);
}

TEST_CASE("sinks are rejected") {
  CHECK_THROWS_AS(parse_graph("[graph]\nkind = explicit\nrationals = true\nvertex a\nvertex b\narrow a b 1\n"),
                  ParseError);
}

TEST_CASE("Cayley generator sets are validated") {
  CHECK_THROWS(parse_graph("[graph]\nkind = cayley-z\nrationals = true\ngen 1 1\n"));
  CHECK_THROWS(parse_graph("[graph]\nkind = cayley-z\nrationals = true\ngen 1 1\ngen 1 2\n"));
}

TEST_CASE("horizon sizes") {
  const Graph ray = realize_horizon(fixture("ray_slim"), 6);
  CHECK(ray.vertex_count() == 7);
  CHECK(ray.arrow_count() == 3 * 4 + 2);
  const Graph z = realize_horizon(fixture("cayley_z"), 5);
  CHECK(z.vertex_count() == 11);
  CHECK(z.find(z_vertex_name(-5)));
  for (std::size_t r = 1; r <= 5; ++r) {
    // ball of radius r in the 4-regular tree: 2*3^r - 1 vertices
    std::size_t pow3 = 1;
    for (std::size_t i = 0; i < r; ++i) pow3 *= 3;
    CHECK(realize_horizon(fixture("cayley_f2"), r).vertex_count() == 2 * pow3 - 1);
  }
  CHECK_THROWS_AS(realize_horizon(fixture("cayley_f2"), 12, 1000), ResourceLimit);
}

TEST_CASE("horizons are nested") {
  for (const char* name : {"ray_const_lambda", "cayley_z", "cayley_f2"}) {
    CAPTURE(name);
    const GraphFamily f = fixture(name);
    CHECK(realize_horizon(f, 2).is_subgraph_of(realize_horizon(f, 3)));
  }
}

TEST_CASE("simplicity gate") {
  CHECK(check_simplicity(fixture("cycle3")) == Simplicity::NotSimple);
  CHECK(check_simplicity(fixture("loops2")) == Simplicity::Simple);
  CHECK(check_simplicity(fixture("cayley_z")) == Simplicity::Simple);
  CHECK(check_simplicity(fixture("ray_slim")) == Simplicity::Simple);
}

TEST_CASE("SCCs against brute-force reachability") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 200; ++round) {
    Graph g;
    const int n = 1 + static_cast<int>(rng() % 9);
    for (int i = 0; i < n; ++i) g.add_vertex("x" + std::to_string(i));
    const int m = static_cast<int>(rng() % (2 * n + 1));
    for (int i = 0; i < m; ++i) g.add_arrow(rng() % n, rng() % n, 1.0);
    const auto r = reach_matrix(g);
    const auto comps = strongly_connected_components(g);
    std::vector<int> comp_of(n, -1);
    for (std::size_t c = 0; c < comps.size(); ++c)
      for (VertexId v : comps[c]) comp_of[v] = static_cast<int>(c);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) CHECK((comp_of[a] == comp_of[b]) == (r[a][b] && r[b][a]));
    bool all = true;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) all = all && r[a][b];
    CHECK(is_strongly_connected(g) == all);
  }
}

TEST_CASE("rescaling multiplies every potential") {
  const GraphFamily f = fixture("cayley_z");
  const GraphFamily g = f.rescaled(Scalar::rational(Rational(3, 2)));
  CHECK(g.z_generators()[0].potential.same_as(Scalar::rational(Rational(3, 2))));
  CHECK(g.z_generators()[1].potential.same_as(Scalar::rational(3)));
  CHECK_THROWS(fixture("ray_iii0").rescaled(Scalar::rational(2)));
}

}  // TEST_SUITE
