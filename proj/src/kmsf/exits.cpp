#include "kmsf/exits.hpp"

#include "kmsf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kmsf {

ExitPath preset_exit(const GraphFamily& family, std::size_t length) {
  if (length < 2) throw InvalidArgument("exit path needs at least two vertices");
  ExitPath t;
  switch (family.kind()) {
    case FamilyKind::Ray:
      for (std::size_t i = 0; i < length; ++i) t.vertices.push_back(ray_vertex_name(i));
      for (std::size_t i = 1; i < length; ++i) t.steps.push_back(family.sequence().level(i));
      t.description = "ray spine v0, v1, ...";
      return t;
    case FamilyKind::CayleyZ: {
      const auto& gens = family.z_generators();
      const ZGenerator* y = &gens.front();
      for (const auto& g : gens) {
        if (g.step > 0) {
          y = &g;
          break;
        }
      }
      for (std::size_t i = 0; i < length; ++i) t.vertices.push_back(z_vertex_name(static_cast<long>(i) * y->step));
      for (std::size_t i = 1; i < length; ++i) t.steps.push_back({y->potential});
      t.description = "geodesic ray along generator " + std::to_string(y->step);
      return t;
    }
    case FamilyKind::CayleyFree: {
      const FreeGenerator& y = family.free_generators().front();
      FreeWord w;
      for (std::size_t i = 0; i < length; ++i) {
        t.vertices.push_back(free_word_name(w));
        w.push_back(y.sign * (y.letter + 1));
      }
      for (std::size_t i = 1; i < length; ++i) t.steps.push_back({y.potential});
      t.description = "geodesic ray along generator " + y.label();
      return t;
    }
    case FamilyKind::Explicit:
      break;
  }
  throw InvalidArgument("finite graphs have no exits");
}

std::string_view summability_name(Summability s) {
  switch (s) {
    case Summability::Summable:
      return "summable";
    case Summability::NotSummable:
      return "not-summable";
    case Summability::Undecided:
      return "undecided";
  }
  return "?";
}

namespace {

constexpr std::size_t kExitBallCap = 200'000;
constexpr std::size_t kCauchyWindow = 5;

struct ExitWindow {
  Graph graph;
  ExitPath exit;
  std::vector<VertexId> t;  // realized t_i
  std::string note;
};

ExitWindow realize_exit(const GraphFamily& family, std::size_t& i_max) {
  if (i_max < kCauchyWindow) throw InvalidArgument("i_max must be at least 5");
  ExitWindow w;
  std::size_t radius = 0;
  switch (family.kind()) {
    case FamilyKind::Ray:
      radius = i_max - 1;
      break;
    case FamilyKind::CayleyZ:
      radius = 2 * i_max;
      w.note = "Green values on the ball of radius " + std::to_string(radius) + " (horizon approximation)";
      break;
    case FamilyKind::CayleyFree: {
      const double r = family.free_rank();
      radius = i_max + 4;
      while (radius > 2 && 1.0 + 2.0 * r * (std::pow(2.0 * r - 1.0, static_cast<double>(radius)) - 1.0) /
                                    (2.0 * r - 2.0) > kExitBallCap) {
        --radius;
      }
      if (radius < i_max + 2) i_max = std::max<std::size_t>(kCauchyWindow, radius - 2);
      w.note = "Green values on the ball of radius " + std::to_string(radius) + " (horizon approximation), i_max " +
               std::to_string(i_max);
      break;
    }
    case FamilyKind::Explicit:
      throw InvalidArgument("finite graphs have no exits");
  }
  w.graph = realize_horizon(family, radius);
  w.exit = preset_exit(family, i_max);
  for (const auto& name : w.exit.vertices) w.t.push_back(w.graph.require(name));
  return w;
}

double spread(const std::vector<double>& r) {
  const std::size_t k = std::min(kCauchyWindow, r.size());
  auto [lo, hi] = std::minmax_element(r.end() - static_cast<long>(k), r.end());
  return *hi - *lo;
}

}  // namespace

SummabilityReport check_beta_summable(const GraphFamily& family, const Scalar& beta, std::size_t i_max, double tol) {
  SummabilityReport rep;
  const DissipativityReport dis = is_dissipative(family, beta);
  if (dis.verdict != Dissipativity::Dissipative) {
    rep.note = "transience not established (" + std::string(dissipativity_name(dis.verdict)) + ")";
    return rep;
  }
  ExitWindow w = realize_exit(family, i_max);
  const WeightedAdjacency A = build_adjacency(w.graph, beta);
  double tb = 1.0;
  double ltb = 0.0;
  bool ok = true;
  for (std::size_t i = 0; i < i_max; ++i) {
    if (i > 0) {
      const double a = A.entry(w.t[i - 1], w.t[i]);
      tb *= a;
      ltb += std::log(a);
    }
    rep.t_beta.push_back(tb);
    rep.log_t_beta.push_back(ltb);
    const GreenResult g = green(A, w.t[0], w.t[i], 1e-14);
    if (!g.converged || !(tb > 0) || !std::isfinite(tb)) ok = false;
    rep.ratios.push_back(g.value / tb);
  }
  rep.note = w.note;
  rep.limit = rep.ratios.back();
  rep.tail_width = spread(rep.ratios);
  if (!ok || !std::isfinite(rep.limit)) {
    rep.note += rep.note.empty() ? "" : "; ";
    rep.note += "Green sums or t^beta not certified";
    return rep;
  }
  if (rep.tail_width < tol * std::max(1.0, std::abs(rep.limit))) {
    rep.verdict = Summability::Summable;
    return rep;
  }
  const std::size_t n = rep.ratios.size();
  bool growing = true;
  for (std::size_t k = n - kCauchyWindow + 1; k < n; ++k) growing = growing && rep.ratios[k] > rep.ratios[k - 1] * 1.001;
  if (growing) rep.verdict = Summability::NotSummable;
  return rep;
}

ConformalMeasure conformal_measure(const GraphFamily& family, const Scalar& beta,
                                   const std::vector<std::string>& vertices, std::size_t i_max, double tol) {
  ConformalMeasure m;
  ExitWindow w = realize_exit(family, i_max);
  m.note = w.note;
  const WeightedAdjacency A = build_adjacency(w.graph, beta);
  std::vector<double> tb{1.0};
  for (std::size_t i = 1; i < i_max; ++i) tb.push_back(tb.back() * A.entry(w.t[i - 1], w.t[i]));
  for (const auto& name : vertices) {
    const auto v = w.graph.find(name);
    if (!v) throw InvalidArgument("vertex '" + name + "' is outside the realized window");
    std::vector<double> r;
    bool certified = true;
    for (std::size_t i = 0; i < i_max; ++i) {
      const GreenResult g = green(A, *v, w.t[i], 1e-14);
      certified = certified && g.converged;
      r.push_back(g.value / tb[i]);
    }
    MeasureValue mv;
    mv.value = r.back();
    mv.error = spread(r);
    mv.converged = certified && mv.error < tol * std::max(1.0, std::abs(mv.value));
    m.values[name] = mv;
  }
  return m;
}

bool is_slim(const GraphFamily& family) {
  switch (family.kind()) {
    case FamilyKind::Ray: {
      const SequenceSpec& s = family.sequence();
      switch (s.tail()) {
        case SequenceSpec::Tail::Constant:
          return s.table().back().size() == 1;
        case SequenceSpec::Tail::Periodic:
          return std::all_of(s.table().begin(), s.table().end(), [](const LevelPotentials& l) { return l.size() == 1; });
        case SequenceSpec::Tail::Formula:
          for (std::size_t n = s.tail_start(); n < s.tail_start() + 64; ++n) {
            if (s.multiplicity(n) != 1) return false;
          }
          return true;
      }
      return false;
    }
    case FamilyKind::CayleyZ:
    case FamilyKind::CayleyFree:
      return true;  // one generator per step of the geodesic exit
    case FamilyKind::Explicit:
      break;
  }
  throw InvalidArgument("finite graphs have no exits");
}

ProductVector product_vector(const LevelPotentials& level, const Scalar& beta) {
  ProductVector v;
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& f : level) mx = std::max(mx, -beta.value() * f.value());
  double z = 0.0;
  for (const auto& f : level) z += std::exp(-beta.value() * f.value() - mx);
  const double lz = mx + std::log(z);
  for (const auto& f : level) {
    v.log_p.push_back(-beta.value() * f.value() - lz);
    v.p.push_back(std::exp(v.log_p.back()));
  }
  // exact: ratios e^{β(F_0 - F_j)} rational for every j
  std::vector<Rational> ratios;
  for (const auto& f : level) {
    Scalar x = beta * (level.front() - f);
    if (!x.is_exact()) return v;
    auto r = x.exact()->exp_rational();
    if (!r) return v;
    ratios.push_back(*r);
  }
  Rational total = 0;
  for (const auto& r : ratios) total += r;
  std::vector<Rational> exact;
  for (const auto& r : ratios) exact.push_back(r / total);
  v.exact = std::move(exact);
  return v;
}

ProductStateSpec product_vectors(const GraphFamily& family, const Scalar& beta, std::size_t count) {
  if (family.kind() != FamilyKind::Ray) throw InvalidArgument("product vectors are defined for ray families");
  ProductStateSpec spec;
  spec.beta = beta.value();
  for (std::size_t n = 1; n <= count; ++n) spec.levels.push_back(product_vector(family.sequence().level(n), beta));
  return spec;
}

double ProductTailVerdict::s() const {
  switch (kind) {
    case Kind::TypeI:
    case Kind::TypeII:
      return -1.0;
    case Kind::TypeIIILambda:
      return std::exp(-alpha.value());
    case Kind::TypeIII1:
      return 1.0;
    case Kind::TypeIII0:
      return 0.0;
    case Kind::Unsupported:
      break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::string_view product_tail_kind_name(ProductTailVerdict::Kind k) {
  switch (k) {
    case ProductTailVerdict::Kind::TypeI:
      return "I";
    case ProductTailVerdict::Kind::TypeII:
      return "II";
    case ProductTailVerdict::Kind::TypeIIILambda:
      return "III_lambda";
    case ProductTailVerdict::Kind::TypeIII1:
      return "III_1";
    case ProductTailVerdict::Kind::TypeIII0:
      return "III_0";
    case ProductTailVerdict::Kind::Unsupported:
      return "unsupported";
  }
  return "?";
}

ProductTailVerdict classify_product_tail(const GraphFamily& family, const Scalar& beta,
                                         const std::vector<std::size_t>& horizons, std::size_t window) {
  if (family.kind() != FamilyKind::Ray) throw InvalidArgument("classify_product_tail needs a ray family");
  if (horizons.empty()) throw InvalidArgument("empty horizon schedule");
  ProductTailVerdict v;
  const SequenceSpec& seq = family.sequence();

  if (is_slim(family)) {
    v.deviation_summable = true;
  } else {
    switch (seq.tail()) {
      case SequenceSpec::Tail::Constant:
      case SequenceSpec::Tail::Periodic:
        // a periodic tail repeats a non-degenerate vector forever
        v.deviation_summable = false;
        break;
      case SequenceSpec::Tail::Formula:
        v.deviation_summable = seq.formula()->deviation_summable(beta.value());
        break;
    }
  }
  if (!v.deviation_summable) {
    v.text = "unsupported sequence kind: no summability rule for formula " + seq.formula()->name;
    return v;
  }
  if (*v.deviation_summable) {
    v.kind = ProductTailVerdict::Kind::TypeI;
    v.text = "type I: sum of (1 - max omega_n) converges";
    return v;
  }

  const GcdMode mode = family_is_exact(family) ? GcdMode::Exact : GcdMode::Tolerance;
  std::vector<ClosedSubgroup> groups;
  std::vector<std::optional<double>> min_abs;
  bool all_zero = true;
  for (std::size_t n : horizons) {
    std::vector<Scalar> diffs;
    for (std::size_t l = n + 1; l <= n + window; ++l) {
      const LevelPotentials lvl = seq.level(l);
      for (std::size_t a = 0; a < lvl.size(); ++a) {
        for (std::size_t b = a + 1; b < lvl.size(); ++b) diffs.push_back(lvl[a] - lvl[b]);
      }
    }
    std::optional<double> m;
    for (const auto& d : diffs) {
      if (d.is_zero()) continue;
      all_zero = false;
      m = m ? std::min(*m, std::abs(d.value())) : std::abs(d.value());
    }
    groups.push_back(real_gcd(diffs, mode));
    min_abs.push_back(m);
    v.diagnostics.push_back("levels " + std::to_string(n + 1) + ".." + std::to_string(n + window) +
                            ": ratio group " + groups.back().str());
  }
  if (all_zero) {
    v.kind = ProductTailVerdict::Kind::TypeII;
    v.text = "type II: every ratio is 1 and the vectors do not degenerate";
    return v;
  }
  const bool stable = std::all_of(groups.begin(), groups.end(), [&](const ClosedSubgroup& g) {
    return g.same_as(groups.front()) && g.kind != ClosedSubgroup::Kind::Trivial;
  });
  if (stable && groups.front().kind == ClosedSubgroup::Kind::Lattice) {
    v.kind = ProductTailVerdict::Kind::TypeIIILambda;
    v.alpha = groups.front().generator;
    v.text = "type III_lambda, lambda = exp(-|beta| * " + v.alpha.str() + ")";
    return v;
  }
  if (stable && groups.front().kind == ClosedSubgroup::Kind::Dense) {
    v.kind = ProductTailVerdict::Kind::TypeIII1;
    v.text = "type III_1: dense tail ratio group";
    return v;
  }
  bool escaping = true;
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    if (!min_abs[k] || *min_abs[k] <= unboundedness_threshold(horizons[k])) escaping = false;
  }
  if (escaping) {
    v.kind = ProductTailVerdict::Kind::TypeIII0;
    v.text = "type III_0: tail ratio groups degenerate with unbounded ratios";
    return v;
  }
  v.text = "unsupported sequence kind: tail ratio group does not stabilize";
  return v;
}

std::string_view semifinite_subtype_name(SemifiniteSubtype s) {
  switch (s) {
    case SemifiniteSubtype::I_inf:
      return "I_inf";
    case SemifiniteSubtype::II_inf:
      return "II_inf";
    case SemifiniteSubtype::NotApplicable:
      return "not applicable";
  }
  return "?";
}

SemifiniteSubtype semifinite_exit_verdict(const GraphFamily& family, bool gauge, bool summable) {
  if (!gauge || !summable) return SemifiniteSubtype::NotApplicable;
  return is_slim(family) ? SemifiniteSubtype::I_inf : SemifiniteSubtype::II_inf;
}

}  // namespace kmsf
