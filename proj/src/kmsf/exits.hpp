#pragma once

// Exit paths, β-summability, conformal measures, slimness and the product
// states ω_n whose Araki–Woods factor gives an independent tail verdict.

#include "kmsf/detour.hpp"
#include "kmsf/spectral.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kmsf {

/// The preset exit of a family: the ray spine v0, v1, ... or the geodesic
/// ray along one generator of a Cayley graph.
struct ExitPath {
  std::vector<std::string> vertices;  // t_1, t_2, ...
  /// Potentials of the arrows t_i -> t_{i+1}.
  std::vector<std::vector<Scalar>> steps;
  std::string description;
};

ExitPath preset_exit(const GraphFamily& family, std::size_t length);

enum class Summability { Summable, NotSummable, Undecided };
std::string_view summability_name(Summability s);

struct SummabilityReport {
  std::vector<double> t_beta;      // t^β(i), i = 1..i_max
  std::vector<double> log_t_beta;
  std::vector<double> ratios;      // r_i = Green(t_1, t_i) / t^β(i)
  double limit = 0.0;
  double tail_width = 0.0;         // spread of the last five ratios
  Summability verdict = Summability::Undecided;
  std::string note;
};

constexpr std::size_t kDefaultExitIMax = 50;
constexpr double kDefaultExitTol = 1e-9;

SummabilityReport check_beta_summable(const GraphFamily& family, const Scalar& beta,
                                      std::size_t i_max = kDefaultExitIMax, double tol = kDefaultExitTol);

struct MeasureValue {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

struct ConformalMeasure {
  std::map<std::string, MeasureValue> values;  // m_t(Z(v))
  std::string note;
};

/// Throws InvalidArgument for a vertex name that never appears in the
/// realized window.
ConformalMeasure conformal_measure(const GraphFamily& family, const Scalar& beta,
                                   const std::vector<std::string>& vertices, std::size_t i_max = kDefaultExitIMax,
                                   double tol = kDefaultExitTol);

/// Per-step arrow multiplicity along the preset exit is eventually 1 under
/// the family's tail rule.
bool is_slim(const GraphFamily& family);

struct ProductVector {
  std::vector<double> p;
  std::vector<double> log_p;
  std::optional<std::vector<Rational>> exact;  // when every ratio is rational
};

struct ProductStateSpec {
  double beta = 0.0;
  std::vector<ProductVector> levels;  // levels 1..count
};

ProductStateSpec product_vectors(const GraphFamily& family, const Scalar& beta, std::size_t count = 10);
ProductVector product_vector(const LevelPotentials& level, const Scalar& beta);

struct ProductTailVerdict {
  enum class Kind { TypeI, TypeII, TypeIIILambda, TypeIII1, TypeIII0, Unsupported };
  Kind kind = Kind::Unsupported;
  /// Generator of the tail group of potential differences; λ = e^{-|β|α}.
  Scalar alpha;
  std::optional<bool> deviation_summable;  // Σ (1 - max ω_n) < ∞
  std::string text;
  std::vector<std::string> diagnostics;

  /// The detour parameter this verdict corresponds to.
  double s() const;
};

std::string_view product_tail_kind_name(ProductTailVerdict::Kind k);

/// Araki–Woods classification of the corner attached to the ray exit: type I
/// when Σ(1 - max ω_n) converges, otherwise decided by the tail group of
/// level potential differences.
ProductTailVerdict classify_product_tail(const GraphFamily& family, const Scalar& beta,
                                         const std::vector<std::size_t>& horizons = {2, 4, 8, 16},
                                         std::size_t window = 12);

enum class SemifiniteSubtype { I_inf, II_inf, NotApplicable };
std::string_view semifinite_subtype_name(SemifiniteSubtype s);

/// Gauge potentials and a summable exit only: I_∞ when slim, II_∞ otherwise.
SemifiniteSubtype semifinite_exit_verdict(const GraphFamily& family, bool gauge, bool summable);

}  // namespace kmsf
