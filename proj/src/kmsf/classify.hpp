#pragma once

// The main case split: dissipativity gate, detour parameter s from the
// detour and/or product-state route, and the resulting factor type.

#include "kmsf/detour.hpp"
#include "kmsf/exits.hpp"
#include "kmsf/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kmsf {

enum class ClassifyMode { Detour, Exit, Both };
std::string_view classify_mode_name(ClassifyMode m);
ClassifyMode parse_classify_mode(std::string_view s);

struct ClassificationRequest {
  GraphFamily family;
  Scalar beta;
  ClassifyMode mode = ClassifyMode::Both;
  SpectralOptions spectral;
  TailOptions tail;
  std::size_t loop_length = 12;
  std::vector<std::size_t> exit_horizons{2, 4, 8, 16};
  bool exact = false;  // force exact gcd arithmetic
  std::uint64_t seed = 1;
};

enum class FactorType { Semifinite_I, Semifinite_II, Semifinite_undetermined, III_lambda, III_0, III_1, Undecided };
std::string_view factor_type_name(FactorType t);

struct Evidence {
  std::string stage;
  std::string detail;
};

struct FactorVerdict {
  FactorType type = FactorType::Undecided;
  std::optional<double> s;
  std::optional<double> lambda;
  std::optional<Scalar> log_lambda;  // exact when the inputs are
  std::string lambda_text;
  std::string s_invariant;
  std::string message;
  Scalar beta;
  std::vector<Evidence> evidence;
  std::vector<std::size_t> horizons;
  std::vector<std::string> assumptions;

  bool undecided() const noexcept { return type == FactorType::Undecided; }
};

/// Throws NotSimple for a graph that fails the gate, Inconsistency when the
/// two routes of "both" mode disagree.
FactorVerdict classify(const ClassificationRequest& req);

enum class ReportFormat { Text, JsonLines, Csv };
ReportFormat parse_report_format(std::string_view s);

constexpr int kReportSchemaVersion = 1;

std::string report(const FactorVerdict& v, ReportFormat format);
std::string csv_header();

}  // namespace kmsf
