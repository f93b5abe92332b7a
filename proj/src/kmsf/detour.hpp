#pragma once

// Detours on wandering paths, the closed subgroup generated by their weights,
// and the detour semigroup S(s) computed from horizon-stabilized data.

#include "kmsf/graph.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kmsf {

/// A wandering path realized on a finite window of its family. Arrow i
/// (0-based) is p_{i+1}.
struct WanderingPath {
  Graph graph;
  std::vector<ArrowId> arrows;
  std::string description;

  VertexId vertex(std::size_t i) const;  // s(p_i), or r of the last arrow for i == size
  /// p[i, j) as a FinitePath.
  FinitePath segment(std::size_t i, std::size_t j) const;
};

/// Ray: the deterministic quasi-typical path whose arrow counts follow the
/// product vectors ω_n at inverse temperature beta (largest-deficit rule).
/// CayleyZ: a periodic word using every generator plus drift steps.
/// `extra` widens the realized window so detours of that length fit.
WanderingPath typical_path(const GraphFamily& family, const Scalar& beta, std::size_t length,
                           std::size_t extra = 0);

/// Arrow index chosen at levels 1..levels by the quasi-typical ray path:
/// largest deficit against ω_n, with counters shared by levels of equal type.
std::vector<std::size_t> ray_typical_choices(const SequenceSpec& seq, double beta, std::size_t levels);

/// Vertices of `g` that belong to realize_horizon(family, n), matched by name.
std::vector<char> horizon_mask(const GraphFamily& family, const Graph& g, std::size_t n);

struct Detour {
  std::size_t i = 0;
  std::size_t j = 0;
  FinitePath mu;
  Scalar delta;
};

struct DetourBounds {
  std::size_t span = 12;     // j - i <= span
  std::size_t mu_len = 12;   // |mu| <= mu_len
  std::size_t window = 12;   // start positions examined past the horizon
  std::uint64_t max_detours = 2'000'000;
};

struct HorizonDeltaSet {
  std::size_t horizon = 0;
  std::size_t first_index = 0;  // first i with p[i,∞) outside H_n
  std::vector<Scalar> deltas;   // distinct, ascending
  std::vector<std::uint64_t> counts;
  std::vector<Detour> detours;  // only when requested
  DetourBounds bounds;

  bool all_zero() const;
  bool has_positive() const;
  bool has_negative() const;
  /// Smallest nonzero |delta|, if any.
  std::optional<double> min_abs_nonzero() const;
};

/// All detours (i, j; μ) outside H_n with i in the window, j - i <= span and
/// |μ| <= mu_len. Deltas are gathered by dynamic programming over
/// (vertex, potential); explicit detours are listed only when keep_detours is
/// set, subject to max_detours (ResourceLimit beyond).
HorizonDeltaSet enumerate_detours(const GraphFamily& family, const WanderingPath& p, std::size_t n,
                                  const DetourBounds& bounds = {}, bool keep_detours = false);

// --- closed subgroups ---------------------------------------------------------

struct ClosedSubgroup {
  enum class Kind { Trivial, Lattice, Dense };
  Kind kind = Kind::Trivial;
  Scalar generator;             // α > 0 for Lattice
  std::vector<Scalar> witness;  // elements actually used
  bool exact = false;

  std::string str() const;
  bool same_as(const ClosedSubgroup& o) const;
};

enum class GcdMode { Exact, Tolerance };
constexpr double kDefaultGcdEps = 1e-9;

/// Exact mode needs every input to carry an exact form and decides
/// proportionality in the LogRational field. Tolerance mode runs Euclidean
/// reduction and calls the group Dense once a nonzero remainder drops below
/// eps.
ClosedSubgroup real_gcd(const std::vector<Scalar>& deltas, GcdMode mode, double eps = kDefaultGcdEps);

// --- semigroups ---------------------------------------------------------------

struct DetourSemigroup {
  enum class Kind { SMinus1, SZero, SGeometric, SFull };
  Kind kind = Kind::SMinus1;
  Scalar alpha;  // s = e^{-α} for SGeometric
  ClosedSubgroup group;
  bool stabilized = true;
  std::string tag;
  std::vector<std::string> diagnostics;

  /// s in {-1} ∪ [0,1].
  double s() const;
  std::string str() const;
};

std::string_view semigroup_kind_name(DetourSemigroup::Kind k);

/// e^x as text: a rational when exact, exp(...) otherwise.
std::string exp_text(const Scalar& x);

enum class Confidence { Structural, Numeric, Undecided };
std::string_view confidence_name(Confidence c);

struct ZeroMembership {
  std::optional<bool> value;
  Confidence confidence = Confidence::Undecided;
  std::string reason;
};

/// Three times the horizon index; nonzero deltas above it count as escaping.
double unboundedness_threshold(std::size_t horizon);

/// Groups are the per-horizon real_gcd results matching `sets`.
ZeroMembership zero_membership(const std::vector<HorizonDeltaSet>& sets, const std::vector<ClosedSubgroup>& groups);

/// Throws Inconsistency for a non-trivial group without 0.
DetourSemigroup classify_semigroup(const ClosedSubgroup& subgroup, bool zero);

struct LoopGroupResult {
  ClosedSubgroup group;
  std::size_t stabilized_at = 0;
  std::size_t max_length = 0;
  bool at_horizon = false;
  bool all_positive = true;
  bool all_negative = true;
  std::uint64_t loops_examined = 0;
};

/// Group generated by the potentials of loops at `base` of length <= max_length
/// (equal to the group generated by differences of loop potentials).
LoopGroupResult loop_difference_group(const Graph& g, VertexId base, std::size_t max_length, GcdMode mode);
/// Cayley presets: loops at the identity.
LoopGroupResult loop_difference_group(const GraphFamily& family, std::size_t max_length, GcdMode mode);

struct ThetaResult {
  enum class Kind { Value, Dense, NoKms };
  Kind kind = Kind::NoKms;
  Scalar theta;  // -α for Value
  LoopGroupResult loops;
  std::string text;
};

ThetaResult theta_F(const GraphFamily& family, std::size_t max_length = 12, GcdMode mode = GcdMode::Tolerance);

struct TailOptions {
  DetourBounds bounds;
  std::vector<std::size_t> horizons{2, 4, 8, 16};
  /// Exact when every potential is exact, tolerance otherwise.
  std::optional<GcdMode> mode;
};

/// Detour semigroup of the quasi-typical ray path at beta. A horizon whose
/// nonzero deltas all share one sign contributes no accumulation point other
/// than 1.
DetourSemigroup tail_semigroup(const GraphFamily& family, const Scalar& beta, const TailOptions& opts = {});

/// Every potential of the family (sampled levels for rays) is exact.
bool family_is_exact(const GraphFamily& family);

}  // namespace kmsf
