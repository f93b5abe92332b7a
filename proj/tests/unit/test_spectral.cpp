#include "common.hpp"

#include "kmsf/errors.hpp"
#include "kmsf/spectral.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <random>

using namespace kmsf;

namespace {

double perron_root(const WeightedAdjacency& A) {
  const auto n = static_cast<Eigen::Index>(A.dimension());
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) M(i, j) = A.entry(i, j);
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(M, false).eigenvalues();
  double r = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) r = std::max(r, std::abs(ev(i)));
  return r;
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("green on n loops matches the geometric series") {
  for (int n : {2, 3}) {
    const Graph g = loops(n).graph();
    for (double shift : {0.1, 1.0}) {
      const double beta = std::log(static_cast<double>(n)) + shift;
      const GreenResult r = green(build_adjacency(g, beta), 0, 0);
      const double expect = 1.0 / (1.0 - n * std::exp(-beta));
      CAPTURE(n);
      CAPTURE(beta);
      CHECK(r.converged);
      CHECK(std::abs(r.value - expect) / expect < 1e-10);
    }
  }
}

TEST_CASE("green divergence certificate at and below ln n") {
  for (int n : {2, 3}) {
    const Graph g = loops(n).graph();
    const Scalar at = parse_scalar("log(" + std::to_string(n) + ")");
    const GreenResult exact = green(build_adjacency(g, at), 0, 0);
    CHECK(exact.diverged);
    CHECK_FALSE(exact.converged);
    for (double beta : {0.5, std::log(static_cast<double>(n)) - 0.01}) {
      const GreenResult r = green(build_adjacency(g, beta), 0, 0);
      CHECK(r.diverged);
      CHECK(std::isfinite(r.value));
    }
  }
}

TEST_CASE("green is exact on acyclic horizons") {
  const Graph g = realize_horizon(fixture("ray_slim"), 6);
  const double beta = 0.7;
  const GreenResult r = green(build_adjacency(g, beta), g.require("v0"), g.require("v5"));
  CHECK(r.converged);
  CHECK(r.tail_bound == 0.0);
  CHECK(r.value == doctest::Approx(81.0 * std::exp(-5 * beta)).epsilon(1e-14));
  const GreenResult none = green(build_adjacency(g, beta), g.require("v5"), g.require("v0"));
  CHECK(none.value == 0.0);
  CHECK(none.converged);
}

TEST_CASE("green rejects bad arguments") {
  const auto A = build_adjacency(loops(2).graph(), 2.0);
  CHECK_THROWS_AS(green(A, 0, 3), InvalidArgument);
  CHECK_THROWS_AS(green(A, 0, 0, 0.0), InvalidArgument);
}

TEST_CASE("overflowing weights name the arrow") {
  CHECK_THROWS_AS(build_adjacency(loops(2, "-1000").graph(), 1.0), NumericOverflow);
}

TEST_CASE("spectral radius against dense eigenvalues") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pot(-1.0, 2.0);
  for (int round = 0; round < 100; ++round) {
    Graph g;
    const int n = 2 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) g.add_vertex("x" + std::to_string(i));
    for (int i = 0; i < n; ++i) g.add_arrow(i, (i + 1) % n, pot(rng));  // strongly connected
    const int extra = static_cast<int>(rng() % (2 * n));
    for (int i = 0; i < extra; ++i) g.add_arrow(rng() % n, rng() % n, pot(rng));
    const auto A = build_adjacency(g, 1.0);
    const SpectralEstimate s = spectral_radius(A);
    CAPTURE(round);
    CHECK(s.lower <= s.upper);
    CHECK(std::abs(s.estimate - perron_root(A)) < 1e-8);
  }
}

TEST_CASE("spectral radius of a nilpotent matrix is zero") {
  const auto A = build_adjacency(realize_horizon(fixture("ray_const_lambda"), 5), 1.0);
  CHECK(spectral_radius(A).estimate == 0.0);
}

TEST_CASE("closed forms for Cayley graphs") {
  const GraphFamily z = fixture("cayley_z");
  for (double beta : {0.5, 1.0, 2.0})
    CHECK(cayley_z_spectral_radius(z.z_generators(), beta) == doctest::Approx(2 * std::exp(-1.5 * beta)).epsilon(1e-10));
  const GraphFamily f2 = fixture("cayley_f2");
  for (double beta : {0.5, 1.0, 2.0}) {
    const double rho = cayley_free_spectral_radius(f2.free_generators(), beta);
    CHECK(rho == doctest::Approx(2 * std::sqrt(3.0) * std::exp(-beta)).epsilon(1e-10));
    // every finite ball gives a lower bound
    const auto A = build_adjacency(realize_horizon(f2, 6), beta);
    CHECK(spectral_radius(A).estimate <= rho * (1 + 1e-9));
  }
}

TEST_CASE("dissipativity verdicts") {
  CHECK(is_dissipative(fixture("loops2"), 0.5).verdict == Dissipativity::Conservative);
  CHECK(is_dissipative(fixture("loops2"), parse_scalar("log(2)")).verdict == Dissipativity::Conservative);
  CHECK(is_dissipative(fixture("ray_const_lambda"), 1.0).verdict == Dissipativity::Dissipative);
  for (const char* b : {"1/2", "1", "2"}) {
    const auto rep = is_dissipative(fixture("cayley_z"), parse_scalar(b));
    CHECK(rep.verdict == Dissipativity::Dissipative);
    REQUIRE(rep.rho);
    CHECK(*rep.rho < 1.0);
  }
  CHECK(is_dissipative(fixture("cayley_f2"), parse_scalar("2")).verdict == Dissipativity::Dissipative);
  CHECK(is_dissipative(fixture("cayley_f2"), parse_scalar("1")).verdict != Dissipativity::Dissipative);
}

TEST_CASE("exact boundary sign") {
  // Z with steps +-1 and potentials 1, 2: d = 4, f = 3; ln 4 - 3 beta = 0 at beta = ln(4)/3
  const Scalar f = parse_scalar("3");
  CHECK(*exact_log_sign(4, parse_scalar("2/3*log(2)"), f) == 0);
  CHECK(*exact_log_sign(4, parse_scalar("1/3"), f) > 0);
  CHECK(*exact_log_sign(4, parse_scalar("1"), f) < 0);
}

}  // TEST_SUITE
