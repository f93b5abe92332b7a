#pragma once

// Monte-Carlo view of the Radon–Nikodym cocycle on the tail equivalence
// relation: sampled pairs (p, q), their cocycle c and D_β = e^{-βc}, and a
// log-scale histogram whose heavy bins estimate the essential range.

#include "kmsf/detour.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kmsf {

/// Prefix of an infinite path as arrow identities with their potentials. For
/// rays an identity is the parallel-arrow index at that level; for Cayley
/// graphs it is the generator index.
struct PathWord {
  std::vector<int> arrows;
  std::vector<Scalar> potentials;
  std::size_t size() const noexcept { return arrows.size(); }
};

struct OrbitPair {
  PathWord p;
  PathWord q;
  long k = 0;                  // p_{i+k} = q_i on the common tail
  std::size_t match_from = 0;  // q-index from which the tails agree
  Scalar c;
  double d_beta = 1.0;
  double weight = 1.0;  // importance weight of the pair
};

struct SamplerOptions {
  std::size_t depth = 8;
  std::uint64_t seed = 1;
  double substitution_rate = 0.25;
  unsigned workers = 0;  // 0 = hardware concurrency
  std::size_t tail = 8;  // common-tail arrows carried past the depth
};

/// Counter-based generator: sample i of seed s starts from mix(s, i).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static SplitMix64 for_sample(std::uint64_t seed, std::uint64_t index);
  std::uint64_t next();
  double uniform();  // [0, 1)
  std::size_t below(std::size_t n);

 private:
  std::uint64_t state_;
};

/// Pairs for inspection and property checks. Proposals are uniform and do
/// not depend on beta; beta only enters the importance weights.
std::vector<OrbitPair> sample_pairs(const GraphFamily& family, const Scalar& beta, std::size_t n_samples,
                                    const SamplerOptions& opts = {});

/// c(p, q) = F(p[0, n+k)) - F(q[0, n)), evaluated at two n past the match
/// point. Throws Inconsistency on a tail mismatch or when the two disagree.
Scalar cocycle_value(const PathWord& p, const PathWord& q, long k, std::size_t match_from);

constexpr double kBinWidth = 1e-4;
constexpr double kLogEscape = 50.0;
constexpr std::size_t kSampleFloor = 10'000;

struct RangeHistogram {
  struct Bin {
    double mass = 0.0;
    std::uint64_t count = 0;
  };
  double beta = 1.0;
  std::map<long, Bin> bins;  // key: round(log d / kBinWidth)
  double mass_to_zero = 0.0;
  double mass_to_infinity = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t diagonal = 0;  // pairs with p = q
  double max_abs_c = 0.0;
  bool low_confidence = false;
  std::vector<std::string> warnings;

  double total_mass() const;
};

struct SampledValue {
  double c = 0.0;
  double weight = 0.0;
  bool diagonal = true;
};

/// Per-sample cocycle values and weights in sample-index order.
std::vector<SampledValue> sample_cocycle_values(const GraphFamily& family, const Scalar& beta,
                                                std::size_t n_samples, const SamplerOptions& opts = {});

/// Bins log D = -scale * c with weights normalized to total mass 1.
RangeHistogram build_histogram(const std::vector<SampledValue>& values, double scale);

RangeHistogram sample_histogram(const GraphFamily& family, const Scalar& beta, std::size_t n_samples,
                                const SamplerOptions& opts = {});

struct RangeEstimate {
  std::vector<double> log_points;  // accumulation points, log scale
  std::vector<double> masses;
  bool mass_to_zero = false;
  bool mass_to_infinity = false;
  bool low_confidence = false;
};

constexpr double kDefaultMassThreshold = 1e-3;

RangeEstimate essential_range_estimate(const RangeHistogram& hist, double delta = kDefaultMassThreshold);

struct AgreementReport {
  bool agree = true;
  std::vector<double> predicted_log;  // inside the compared window
  std::vector<std::string> mismatches;
  std::optional<double> max_gap;  // for S(1)
  std::string summary;
};

constexpr double kMatchTolerance = 1e-3;

/// Detected points must lie within kMatchTolerance of log S(s)^β; every
/// predicted point with |z| <= z_window must be detected. Without z_window,
/// the window is the largest |z| detected.
AgreementReport compare_to_prediction(const RangeEstimate& est, const DetourSemigroup& sem, const Scalar& beta,
                                      std::optional<long> z_window = std::nullopt);

/// CSV with columns bin_log_center,mass.
std::string histogram_csv(const RangeHistogram& hist);
std::string range_report(const RangeHistogram& hist, const RangeEstimate& est, const AgreementReport& agreement);

}  // namespace kmsf
