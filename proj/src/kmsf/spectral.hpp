#pragma once

// The matrix A(β), truncated Green sums with certified tails, spectral radius
// bounds, and the transience test that decides dissipativity.

#include "kmsf/graph.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kmsf {

class WeightedAdjacency {
 public:
  struct Entry {
    VertexId col;
    double weight;
  };
  /// One arrow's contribution, kept for exact arguments.
  struct ArrowTerm {
    VertexId source;
    VertexId range;
    Scalar potential;
  };

  WeightedAdjacency() = default;
  WeightedAdjacency(Scalar beta, std::vector<std::vector<Entry>> rows, std::vector<ArrowTerm> arrows = {});

  const Scalar& beta() const noexcept { return beta_; }
  std::size_t dimension() const noexcept { return rows_.size(); }
  bool is_dense() const noexcept { return !dense_.empty(); }
  double entry(VertexId v, VertexId w) const;
  const std::vector<Entry>& row(VertexId v) const { return rows_.at(v); }
  const std::vector<ArrowTerm>& arrow_terms() const noexcept { return arrows_; }
  double row_sum(VertexId v) const;

  /// y = x A (x a row vector).
  void left_multiply(const std::vector<double>& x, std::vector<double>& y) const;
  /// y = A x.
  void right_multiply(const std::vector<double>& x, std::vector<double>& y) const;

  /// Principal submatrix on `keep`, reindexed in the given order.
  WeightedAdjacency restricted(const std::vector<VertexId>& keep) const;

 private:
  Scalar beta_;
  std::vector<std::vector<Entry>> rows_;  // sorted by column, one entry per column
  std::vector<double> dense_;             // row-major copy when dimension < 64
  std::vector<ArrowTerm> arrows_;
};

constexpr std::size_t kDenseBelow = 64;

/// Throws NumericOverflow naming the arrow when e^{-βF} is not finite.
WeightedAdjacency build_adjacency(const Graph& g, const Scalar& beta);

struct GreenResult {
  double value = 0.0;
  std::size_t N = 0;
  std::optional<double> tail_bound;  // empty means unknown
  bool converged = false;
  bool diverged = false;
  std::string certificate;
};

constexpr double kDefaultGreenTol = 1e-12;
constexpr std::size_t kDefaultGreenNMax = 10'000;

/// Partial sums of Σ_n A^n_{v,w}. Convergence is declared only with a
/// certificate: acyclicity of the v→w relevant subgraph, or a
/// Collatz–Wielandt bound ρ̄ < 1 giving tail ≤ (x_N·u) ρ̄/(1-ρ̄)/u_w, checked
/// against tol·max(1, value). Divergence needs ρ ≥ 1 on a component between v
/// and w.
GreenResult green(const WeightedAdjacency& A, VertexId v, VertexId w, double tol = kDefaultGreenTol,
                  std::size_t n_max = kDefaultGreenNMax);

struct SpectralEstimate {
  double estimate = 0.0;
  double lower = 0.0;  // Collatz–Wielandt bounds
  double upper = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Spectral radius of a nonnegative matrix as the maximum over strongly
/// connected blocks of shifted power iteration.
SpectralEstimate spectral_radius(const WeightedAdjacency& A, double tol = 1e-12,
                                 std::size_t max_iterations = 200'000);

enum class Dissipativity { Dissipative, Conservative, Undecided };
std::string_view dissipativity_name(Dissipativity d);

struct DissipativityReport {
  Dissipativity verdict = Dissipativity::Undecided;
  std::optional<double> rho;  // spectral radius of A(β) when known
  std::string certificate;
  std::vector<std::string> notes;
};

struct SpectralOptions {
  double tol = kDefaultGreenTol;
  std::size_t n_max = kDefaultGreenNMax;
  std::vector<std::size_t> horizons{8, 16, 32, 64};
  std::size_t vertex_cap = kDefaultVertexCap;
};

DissipativityReport is_dissipative(const GraphFamily& family, const Scalar& beta,
                                   const SpectralOptions& opts = {});

/// Closed forms for the spectral radius of A(β) on the Cayley presets.
double cayley_z_spectral_radius(const std::vector<ZGenerator>& gens, double beta);
double cayley_free_spectral_radius(const std::vector<FreeGenerator>& gens, double beta);

/// Exact sign of ln(d) - β f when both β and f are exact and β f stays in the
/// LogRational field.
std::optional<int> exact_log_sign(std::size_t d, const Scalar& beta, const Scalar& f);

}  // namespace kmsf
