#include "common.hpp"

#include "kmsf/errors.hpp"
#include "kmsf/orbits.hpp"

#include <doctest.h>

#include <cmath>

using namespace kmsf;

TEST_SUITE("orbits") {

TEST_CASE("splitmix streams are per sample") {
  SplitMix64 a = SplitMix64::for_sample(5, 10), b = SplitMix64::for_sample(5, 10), c = SplitMix64::for_sample(5, 11);
  const auto x = a.next();
  CHECK(x == b.next());
  CHECK(x != c.next());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("pairs are tail equivalent and carry their cocycle") {
  for (const char* name : {"ray_const_lambda", "ray_slim", "cayley_z", "cayley_f2"}) {
    CAPTURE(name);
    const auto pairs = sample_pairs(fixture(name), 1.0, 200);
    for (const OrbitPair& p : pairs) {
      CHECK(cocycle_value(p.p, p.q, p.k, p.match_from).same_as(p.c));
      CHECK(p.d_beta == doctest::Approx(std::exp(-p.c.value())));
      CHECK(p.weight > 0.0);
    }
  }
}

TEST_CASE("cocycle values") {
  const GraphFamily f = fixture("ray_const_lambda");
  const auto lvl = f.sequence().level(1);
  PathWord q{{0, 0, 0, 0}, {lvl[0], lvl[0], lvl[0], lvl[0]}};
  PathWord p = q;
  CHECK(cocycle_value(p, q, 0, 2).is_zero());
  p.arrows[1] = 1;
  p.potentials[1] = lvl[1];
  // one swap: F(p) - F(q) = a_k - 1 = -ln(lambda)
  CHECK(cocycle_value(p, q, 0, 2).same_as(parse_scalar("log(2)")));
  CHECK(cocycle_value(q, p, 0, 2).same_as(parse_scalar("-log(2)")));
  PathWord bad = p;
  bad.arrows[3] = 1;
  bad.potentials[3] = lvl[1];
  CHECK_THROWS_AS(cocycle_value(bad, q, 0, 2), Inconsistency);
}

TEST_CASE("trivial cocycles give a point mass at one") {
  for (const char* text : {"[graph]\nkind = ray\nrationals = true\nlevel 1 1 1\ntail = constant\n", ""}) {
    const GraphFamily f = *text ? parse_graph(text) : fixture("ray_slim");
    const RangeHistogram h = sample_histogram(f, 1.0, 20000);
    const RangeEstimate e = essential_range_estimate(h);
    REQUIRE(e.log_points.size() == 1);
    CHECK(e.log_points[0] == 0.0);
    CHECK(h.max_abs_c == 0.0);
  }
  const RangeHistogram slim = sample_histogram(fixture("ray_slim"), 1.0, 20000);
  CHECK(slim.diagonal < slim.samples);  // levels 1-4 still have parallel arrows
}

TEST_CASE("one-way generators give only diagonal pairs") {
  const GraphFamily f = parse_graph("[graph]\nkind = cayley-free\nrationals = true\ngen a+ 1\ngen b+ 1\n");
  const RangeHistogram h = sample_histogram(f, 1.0, 1000);
  CHECK(h.diagonal == h.samples);
  CHECK_FALSE(h.warnings.empty());
  CHECK(h.low_confidence);
}

TEST_CASE("total mass is one and runs are deterministic") {
  SamplerOptions one, many;
  one.workers = 1;
  many.workers = 7;
  one.seed = many.seed = 99;
  const RangeHistogram a = sample_histogram(fixture("ray_const_lambda"), 1.0, 50000, one);
  const RangeHistogram b = sample_histogram(fixture("ray_const_lambda"), 1.0, 50000, many);
  CHECK(std::abs(a.total_mass() - 1.0) < 1e-12);
  REQUIRE(a.bins.size() == b.bins.size());
  for (auto ia = a.bins.begin(), ib = b.bins.begin(); ia != a.bins.end(); ++ia, ++ib) {
    CHECK(ia->first == ib->first);
    CHECK(ia->second.count == ib->second.count);
    CHECK(ia->second.mass == ib->second.mass);
  }
}

TEST_CASE("sampled values lie on the predicted lattice") {
  const RangeHistogram h = sample_histogram(fixture("ray_const_lambda"), 2.0, 20000);
  for (const auto& [key, bin] : h.bins) {
    const double z = static_cast<double>(key) * kBinWidth / (2 * std::log(2.0));
    CHECK(std::abs(z - std::round(z)) < 1e-3);
  }
  const RangeHistogram cz = sample_histogram(fixture("cayley_z"), 1.0, 20000);
  for (const auto& [key, bin] : cz.bins) {
    const double z = static_cast<double>(key) * kBinWidth / 3.0;
    CHECK(std::abs(z - std::round(z)) < 1e-3);
  }
}

TEST_CASE("prediction comparison") {
  DetourSemigroup sem;
  sem.kind = DetourSemigroup::Kind::SGeometric;
  sem.alpha = parse_scalar("log(2)");
  RangeEstimate est;
  const double l2 = std::log(2.0);
  est.log_points = {-2 * l2, -l2, 0, l2, 2 * l2};
  CHECK(compare_to_prediction(est, sem, 1.0).agree);
  CHECK(compare_to_prediction(est, sem, 1.0, 3).mismatches.size() == 2);
  est.log_points.push_back(0.5);
  CHECK_FALSE(compare_to_prediction(est, sem, 1.0).agree);
  DetourSemigroup point;
  RangeEstimate at_one;
  at_one.log_points = {0.0};
  CHECK(compare_to_prediction(at_one, point, 1.0).agree);
}

TEST_CASE("csv output") {
  const RangeHistogram h = sample_histogram(fixture("ray_const_lambda"), 1.0, 2000);
  const std::string csv = histogram_csv(h);
  CHECK(csv.rfind("bin_log_center,mass\n", 0) == 0);
  CHECK(h.low_confidence);
}

}  // TEST_SUITE
