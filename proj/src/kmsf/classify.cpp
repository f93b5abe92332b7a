#include "kmsf/classify.hpp"

#include "kmsf/errors.hpp"

#include <cmath>
#include <json.hpp>
#include <sstream>

namespace kmsf {

std::string_view classify_mode_name(ClassifyMode m) {
  switch (m) {
    case ClassifyMode::Detour:
      return "detour";
    case ClassifyMode::Exit:
      return "exit";
    case ClassifyMode::Both:
      return "both";
  }
  return "?";
}

ClassifyMode parse_classify_mode(std::string_view s) {
  if (s == "detour") return ClassifyMode::Detour;
  if (s == "exit") return ClassifyMode::Exit;
  if (s == "both") return ClassifyMode::Both;
  throw InvalidArgument("unknown mode '" + std::string(s) + "' (expected detour, exit or both)");
}

std::string_view factor_type_name(FactorType t) {
  switch (t) {
    case FactorType::Semifinite_I:
      return "Semifinite_I";
    case FactorType::Semifinite_II:
      return "Semifinite_II";
    case FactorType::Semifinite_undetermined:
      return "Semifinite_undetermined";
    case FactorType::III_lambda:
      return "III_lambda";
    case FactorType::III_0:
      return "III_0";
    case FactorType::III_1:
      return "III_1";
    case FactorType::Undecided:
      return "Undecided";
  }
  return "?";
}

namespace {

// Route-independent description of s.
struct SParam {
  DetourSemigroup::Kind kind = DetourSemigroup::Kind::SMinus1;
  Scalar alpha;  // SGeometric only
  std::string source;
};

Scalar abs_scalar(const Scalar& x) { return x.sign() < 0 ? -x : x; }

std::string s_text(const SParam& p) {
  switch (p.kind) {
    case DetourSemigroup::Kind::SMinus1:
      return "s = -1";
    case DetourSemigroup::Kind::SZero:
      return "s = 0";
    case DetourSemigroup::Kind::SGeometric:
      return "s = " + exp_text(-p.alpha);
    case DetourSemigroup::Kind::SFull:
      return "s = 1";
  }
  return "?";
}

bool same_s(const SParam& a, const SParam& b) {
  if (a.kind != b.kind) return false;
  if (a.kind != DetourSemigroup::Kind::SGeometric) return true;
  if (a.alpha.is_exact() && b.alpha.is_exact()) return a.alpha.same_as(b.alpha);
  return std::abs(a.alpha.value() - b.alpha.value()) <= 1e-9 * std::max(1.0, std::abs(a.alpha.value()));
}

std::optional<SParam> from_product(const ProductTailVerdict& v) {
  using K = ProductTailVerdict::Kind;
  switch (v.kind) {
    case K::TypeI:
    case K::TypeII:
      return SParam{DetourSemigroup::Kind::SMinus1, {}, "product"};
    case K::TypeIII0:
      return SParam{DetourSemigroup::Kind::SZero, {}, "product"};
    case K::TypeIIILambda:
      return SParam{DetourSemigroup::Kind::SGeometric, v.alpha, "product"};
    case K::TypeIII1:
      return SParam{DetourSemigroup::Kind::SFull, {}, "product"};
    case K::Unsupported:
      break;
  }
  return std::nullopt;
}

FactorVerdict undecided(FactorVerdict v, std::string message) {
  v.type = FactorType::Undecided;
  v.message = std::move(message);
  v.s_invariant = "unknown";
  return v;
}

}  // namespace

FactorVerdict classify(const ClassificationRequest& req) {
  const GraphFamily& fam = req.family;
  if (!std::isfinite(req.beta.value())) throw InvalidArgument("beta must be finite");
  FactorVerdict v;
  v.beta = req.beta;
  v.horizons = req.spectral.horizons;
  if (fam.is_preset())
    v.assumptions = {"extremal weight", "measure concentrated on wandering paths with the preset exit"};

  const Simplicity simple = check_simplicity(fam);
  v.evidence.push_back({"simplicity", std::string(simplicity_name(simple))});
  if (simple == Simplicity::NotSimple) throw NotSimple("the graph fails cofinality or condition L");

  if (req.beta.is_zero()) {
    v.type = FactorType::Semifinite_undetermined;
    v.s_invariant = "{1}";
    v.message = "beta = 0: the weight is a trace";
    return v;
  }

  const DissipativityReport dis = is_dissipative(fam, req.beta, req.spectral);
  {
    std::string d = std::string(dissipativity_name(dis.verdict)) + ": " + dis.certificate;
    if (dis.rho) d += " (rho = " + std::to_string(*dis.rho) + ")";
    v.evidence.push_back({"dissipativity", d});
  }
  if (dis.verdict == Dissipativity::Conservative) return undecided(v, "conservative regime: out of scope");
  if (fam.kind() == FamilyKind::Explicit) return undecided(v, "finite graph: no wandering paths");
  if (dis.verdict != Dissipativity::Dissipative)
    return undecided(v, "dissipativity undecided: " + dis.certificate);

  const GcdMode mode = req.exact || family_is_exact(fam) ? GcdMode::Exact : GcdMode::Tolerance;
  std::optional<SParam> by_detour, by_exit;
  std::string exit_gap;

  if (req.mode != ClassifyMode::Exit) {
    if (fam.kind() == FamilyKind::Ray) {
      TailOptions to = req.tail;
      if (req.exact) to.mode = GcdMode::Exact;
      const DetourSemigroup sem = tail_semigroup(fam, req.beta, to);
      v.evidence.push_back({"detour", sem.str() + " [" + sem.tag + "]"});
      by_detour = SParam{sem.kind, sem.alpha, "detour"};
    } else {
      const ThetaResult th = theta_F(fam, req.loop_length, mode);
      v.evidence.push_back({"detour", th.text});
      if (th.kind == ThetaResult::Kind::Value)
        by_detour = SParam{DetourSemigroup::Kind::SGeometric, -th.theta, "detour"};
      else if (th.kind == ThetaResult::Kind::Dense)
        by_detour = SParam{DetourSemigroup::Kind::SFull, {}, "detour"};
      else if (req.mode == ClassifyMode::Detour)
        return undecided(v, "no KMS-compatible loop structure: " + th.text);
    }
  }
  if (req.mode != ClassifyMode::Detour) {
    if (fam.kind() == FamilyKind::Ray) {
      const ProductTailVerdict pt = classify_product_tail(fam, req.beta, req.exit_horizons);
      v.evidence.push_back({"exit", pt.text});
      by_exit = from_product(pt);
      if (!by_exit) exit_gap = "product-state route inconclusive: " + pt.text;
    } else {
      exit_gap = "product-state route is defined for ray families only";
      v.evidence.push_back({"exit", exit_gap});
    }
  }

  std::optional<SParam> s;
  switch (req.mode) {
    case ClassifyMode::Detour:
      s = by_detour;
      break;
    case ClassifyMode::Exit:
      if (!by_exit) return undecided(v, exit_gap);
      s = by_exit;
      break;
    case ClassifyMode::Both:
      if (by_detour && by_exit) {
        if (!same_s(*by_detour, *by_exit))
          throw Inconsistency("cross-check disagreement: detour route gives " + s_text(*by_detour) +
                              ", product-state route gives " + s_text(*by_exit));
        v.evidence.push_back({"cross-check", "detour and product-state routes agree"});
        s = by_detour;
      } else if (by_detour && fam.kind() != FamilyKind::Ray) {
        v.evidence.push_back({"cross-check", "unavailable: " + exit_gap});
        s = by_detour;
      } else {
        return undecided(v, by_detour ? exit_gap : "detour route inconclusive");
      }
      break;
  }
  if (!s) return undecided(v, "detour parameter undetermined");

  switch (s->kind) {
    case DetourSemigroup::Kind::SMinus1: {
      v.s = -1.0;
      v.s_invariant = "{1}";
      const bool gauge = fam.is_gauge();
      bool summable = false;
      if (gauge && fam.kind() == FamilyKind::Ray) {
        const SummabilityReport sr = check_beta_summable(fam, req.beta);
        summable = sr.verdict == Summability::Summable;
        v.evidence.push_back({"summability", std::string(summability_name(sr.verdict))});
      }
      switch (semifinite_exit_verdict(fam, gauge, summable)) {
        case SemifiniteSubtype::I_inf:
          v.type = FactorType::Semifinite_I;
          v.message = "type I_inf: slim summable exit";
          break;
        case SemifiniteSubtype::II_inf:
          v.type = FactorType::Semifinite_II;
          v.message = "type II_inf: summable exit that is not slim";
          break;
        case SemifiniteSubtype::NotApplicable:
          v.type = FactorType::Semifinite_undetermined;
          v.message = "semifinite; I or II not determined";
          break;
      }
      break;
    }
    case DetourSemigroup::Kind::SZero:
      v.type = FactorType::III_0;
      v.s = 0.0;
      v.lambda = 0.0;
      v.lambda_text = "0";
      v.s_invariant = "{0,1}";
      break;
    case DetourSemigroup::Kind::SGeometric: {
      v.type = FactorType::III_lambda;
      v.s = std::exp(-s->alpha.value());
      v.log_lambda = -(s->alpha * abs_scalar(req.beta));
      v.lambda = std::exp(v.log_lambda->value());
      v.lambda_text = exp_text(*v.log_lambda);
      v.s_invariant = "{0} ∪ {λ^z : z ∈ ℤ}";
      break;
    }
    case DetourSemigroup::Kind::SFull:
      v.type = FactorType::III_1;
      v.s = 1.0;
      v.lambda = 1.0;
      v.lambda_text = "1";
      v.s_invariant = "[0,∞)";
      break;
  }
  if (v.message.empty()) v.message = s_text(*s);
  return v;
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "text") return ReportFormat::Text;
  if (s == "json-lines" || s == "jsonl" || s == "json") return ReportFormat::JsonLines;
  if (s == "csv") return ReportFormat::Csv;
  throw InvalidArgument("unknown format '" + std::string(s) + "' (expected text, json-lines or csv)");
}

std::string csv_header() { return "schema,beta,type,s,lambda,lambda_exact,s_invariant,message"; }

namespace {

std::string num(std::optional<double> x) {
  if (!x) return "";
  std::ostringstream os;
  os.precision(17);
  os << *x;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string report(const FactorVerdict& v, ReportFormat format) {
  std::ostringstream os;
  switch (format) {
    case ReportFormat::Text: {
      os << "type: " << factor_type_name(v.type) << "\n";
      os << "beta: " << v.beta.str() << "\n";
      if (v.s) os << "s: " << num(v.s) << "\n";
      if (v.type == FactorType::III_lambda) os << "lambda: " << v.lambda_text << " (" << num(v.lambda) << ")\n";
      os << "S-invariant: " << v.s_invariant << "\n";
      os << "message: " << v.message << "\n";
      for (const auto& e : v.evidence) os << "evidence[" << e.stage << "]: " << e.detail << "\n";
      if (!v.horizons.empty()) {
        os << "horizons:";
        for (auto h : v.horizons) os << ' ' << h;
        os << "\n";
      }
      for (const auto& a : v.assumptions) os << "assumption: " << a << "\n";
      break;
    }
    case ReportFormat::JsonLines: {
      nlohmann::ordered_json j;
      j["schema"] = "kmsf.verdict/" + std::to_string(kReportSchemaVersion);
      j["type"] = factor_type_name(v.type);
      j["beta"] = v.beta.str();
      j["s"] = v.s ? nlohmann::ordered_json(*v.s) : nlohmann::ordered_json();
      j["lambda"] = v.lambda ? nlohmann::ordered_json(*v.lambda) : nlohmann::ordered_json();
      j["lambda_exact"] = v.lambda_text;
      j["s_invariant"] = v.s_invariant;
      j["message"] = v.message;
      nlohmann::ordered_json ev = nlohmann::ordered_json::array();
      for (const auto& e : v.evidence) ev.push_back({{"stage", e.stage}, {"detail", e.detail}});
      j["evidence"] = ev;
      j["horizons"] = v.horizons;
      j["assumptions"] = v.assumptions;
      os << j.dump() << "\n";
      break;
    }
    case ReportFormat::Csv:
      os << csv_header() << "\n";
      os << "kmsf.verdict/" << kReportSchemaVersion << ',' << csv_field(v.beta.str()) << ','
         << factor_type_name(v.type) << ',' << num(v.s) << ',' << num(v.lambda) << ',' << csv_field(v.lambda_text)
         << ',' << csv_field(v.s_invariant) << ',' << csv_field(v.message) << "\n";
      break;
  }
  return os.str();
}

}  // namespace kmsf
