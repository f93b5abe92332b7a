#pragma once

// Text renderings behind the green, semigroup, exits and sample-orbits
// subcommands. Each returns the document plus whether the outcome was an
// honest "undecided".

#include "kmsf/classify.hpp"
#include "kmsf/orbits.hpp"

#include <string>

namespace kmsf {

struct TextReport {
  std::string text;
  bool undecided = false;
};

struct GreenQuery {
  std::string from;
  std::string to;
  double tol = kDefaultGreenTol;
  std::size_t n_max = kDefaultGreenNMax;
  /// Horizon realized for preset families; 0 picks a default per kind.
  std::size_t horizon = 0;
};

/// key=value lines. Preset families are truncated to a horizon, which the
/// report states.
TextReport green_report(const GraphFamily& family, const Scalar& beta, const GreenQuery& q);

struct SemigroupQuery {
  Scalar beta = Scalar(1.0);
  TailOptions tail;
  std::size_t loop_length = 12;
  bool exact = false;
};

TextReport semigroup_report(const GraphFamily& family, const SemigroupQuery& q);

TextReport exits_report(const GraphFamily& family, const Scalar& beta, std::size_t i_max = kDefaultExitIMax,
                        double tol = kDefaultExitTol);

struct OrbitQuery {
  std::size_t samples = 1'000'000;
  SamplerOptions sampler;
  double delta = kDefaultMassThreshold;
  std::string out_path;  // CSV; the report goes to out_path + ".report"
};

/// Samples, writes the CSV and report files when out_path is set, and
/// returns the report text.
TextReport sample_orbits_report(const GraphFamily& family, const Scalar& beta, const OrbitQuery& q);

}  // namespace kmsf
