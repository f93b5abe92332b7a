#include "kmsf/reports.hpp"

#include "kmsf/errors.hpp"

#include <fstream>
#include <sstream>

namespace kmsf {

namespace {

std::size_t default_horizon(const GraphFamily& f) {
  switch (f.kind()) {
    case FamilyKind::Explicit:
      return 0;
    case FamilyKind::Ray:
    case FamilyKind::CayleyZ:
      return 64;
    case FamilyKind::CayleyFree:
      return 8;
  }
  return 0;
}

std::ostringstream stream() {
  std::ostringstream os;
  os.precision(17);
  return os;
}

// Detour-route semigroup for either kind of preset.
std::optional<DetourSemigroup> predicted_semigroup(const GraphFamily& f, const Scalar& beta, std::string& why) {
  if (f.kind() == FamilyKind::Ray) return tail_semigroup(f, beta);
  if (f.kind() == FamilyKind::Explicit) {
    why = "finite graph: no wandering paths";
    return std::nullopt;
  }
  const ThetaResult th = theta_F(f, 12, family_is_exact(f) ? GcdMode::Exact : GcdMode::Tolerance);
  DetourSemigroup sem;
  sem.group = th.loops.group;
  sem.tag = "loops";
  if (th.kind == ThetaResult::Kind::Value) {
    sem.kind = DetourSemigroup::Kind::SGeometric;
    sem.alpha = -th.theta;
    return sem;
  }
  if (th.kind == ThetaResult::Kind::Dense) {
    sem.kind = DetourSemigroup::Kind::SFull;
    return sem;
  }
  why = th.text;
  return std::nullopt;
}

}  // namespace

TextReport green_report(const GraphFamily& family, const Scalar& beta, const GreenQuery& q) {
  const std::size_t horizon = q.horizon ? q.horizon : default_horizon(family);
  const Graph g = family.kind() == FamilyKind::Explicit ? family.graph() : realize_horizon(family, horizon);
  const auto from = g.find(q.from);
  const auto to = g.find(q.to);
  if (!from) throw InvalidArgument("unknown vertex '" + q.from + "'");
  if (!to) throw InvalidArgument("unknown vertex '" + q.to + "'");
  const GreenResult r = green(build_adjacency(g, beta), *from, *to, q.tol, q.n_max);
  auto os = stream();
  os << "value=" << r.value << "\n";
  os << "N=" << r.N << "\n";
  os << "tail_bound=";
  if (r.tail_bound) os << *r.tail_bound;
  os << "\n";
  os << "converged=" << (r.converged ? "true" : "false") << "\n";
  os << "diverged=" << (r.diverged ? "true" : "false") << "\n";
  os << "certificate=" << r.certificate << "\n";
  if (family.kind() != FamilyKind::Explicit) os << "horizon=" << horizon << "\n";
  return {os.str(), !r.converged && !r.diverged};
}

TextReport semigroup_report(const GraphFamily& family, const SemigroupQuery& q) {
  auto os = stream();
  TextReport out;
  if (family.kind() == FamilyKind::Ray) {
    TailOptions to = q.tail;
    if (q.exact) to.mode = GcdMode::Exact;
    const DetourSemigroup sem = tail_semigroup(family, q.beta, to);
    os << "semigroup: " << sem.str() << "\n";
    os << "kind: " << semigroup_kind_name(sem.kind) << "\n";
    os << "s: " << sem.s() << "\n";
    os << "group: " << sem.group.str() << "\n";
    os << "witness:";
    for (const auto& w : sem.group.witness) os << ' ' << w.str();
    os << "\n";
    os << "stabilized: " << (sem.stabilized ? "true" : "false") << "\n";
    os << "tag: " << sem.tag << "\n";
    for (const auto& d : sem.diagnostics) os << "diagnostic: " << d << "\n";
    out.undecided = !sem.stabilized;
  } else if (family.kind() == FamilyKind::Explicit) {
    os << "semigroup: undefined\nnote: finite graph: no wandering paths\n";
    out.undecided = true;
  } else {
    const GcdMode mode = q.exact || family_is_exact(family) ? GcdMode::Exact : GcdMode::Tolerance;
    const ThetaResult th = theta_F(family, q.loop_length, mode);
    os << "theta: " << th.text << "\n";
    os << "group: " << th.loops.group.str() << "\n";
    os << "witness:";
    for (const auto& w : th.loops.group.witness) os << ' ' << w.str();
    os << "\n";
    os << "loops_examined: " << th.loops.loops_examined << "\n";
    os << "stabilized_at: " << th.loops.stabilized_at << "\n";
    os << "max_length: " << th.loops.max_length << "\n";
    os << "at_horizon: " << (th.loops.at_horizon ? "true" : "false") << "\n";
    std::string why;
    if (auto sem = predicted_semigroup(family, q.beta, why))
      os << "semigroup: " << sem->str() << "\n";
    else
      os << "semigroup: undetermined (" << why << ")\n";
    out.undecided = th.kind == ThetaResult::Kind::NoKms || th.loops.at_horizon;
  }
  out.text = os.str();
  return out;
}

TextReport exits_report(const GraphFamily& family, const Scalar& beta, std::size_t i_max, double tol) {
  auto os = stream();
  const SummabilityReport sr = check_beta_summable(family, beta, i_max, tol);
  os << "summability: " << summability_name(sr.verdict) << "\n";
  os << "limit: " << sr.limit << "\n";
  os << "tail_width: " << sr.tail_width << "\n";
  if (!sr.note.empty()) os << "note: " << sr.note << "\n";
  os << "i,t_beta,ratio\n";
  for (std::size_t i = 0; i < sr.ratios.size(); ++i)
    os << i + 1 << ',' << sr.t_beta[i] << ',' << sr.ratios[i] << "\n";
  os << "slim: " << (is_slim(family) ? "true" : "false") << "\n";
  if (family.kind() == FamilyKind::Ray) {
    const ProductStateSpec spec = product_vectors(family, beta, 10);
    for (std::size_t n = 0; n < spec.levels.size(); ++n) {
      os << "omega[" << n + 1 << "]:";
      const auto& lv = spec.levels[n];
      if (lv.exact) {
        for (const auto& r : *lv.exact) os << ' ' << r;
      } else {
        for (double p : lv.p) os << ' ' << p;
      }
      os << "\n";
    }
    const ProductTailVerdict pt = classify_product_tail(family, beta, {2, 4, 8, 16});
    os << "R(t): " << pt.text << "\n";
    for (const auto& d : pt.diagnostics) os << "diagnostic: " << d << "\n";
  } else {
    os << "R(t): product states are defined for ray families only\n";
  }
  return {os.str(), sr.verdict == Summability::Undecided};
}

TextReport sample_orbits_report(const GraphFamily& family, const Scalar& beta, const OrbitQuery& q) {
  const RangeHistogram hist = sample_histogram(family, beta, q.samples, q.sampler);
  const RangeEstimate est = essential_range_estimate(hist, q.delta);
  std::string why;
  const auto sem = predicted_semigroup(family, beta, why);
  AgreementReport agreement;
  if (sem) {
    agreement = compare_to_prediction(est, *sem, beta);
  } else {
    agreement.agree = false;
    agreement.summary = "no prediction: " + why;
  }
  std::string text = range_report(hist, est, agreement);
  text += "note: sampled histogram with mass threshold; a verification instrument, not a proof\n";
  if (!q.out_path.empty()) {
    std::ofstream csv(q.out_path);
    if (!csv) throw IoError("cannot write " + q.out_path);
    csv << histogram_csv(hist);
    std::ofstream rep(q.out_path + ".report");
    if (!rep) throw IoError("cannot write " + q.out_path + ".report");
    rep << text;
  }
  return {text, !sem || hist.low_confidence};
}

}  // namespace kmsf
