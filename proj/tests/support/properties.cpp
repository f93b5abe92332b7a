#include "properties.hpp"

#include "kmsf/classify.hpp"
#include "kmsf/errors.hpp"
#include "kmsf/orbits.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace kmsf::testing {

namespace {

using Rng = std::mt19937_64;

const char* const kPotentials[] = {"1", "2", "3/2", "1+log(2)", "1+2*log(2)", "1+log(3)", "2+log(2)", "5/2"};

Scalar random_potential(Rng& rng, int pool = 8) {
  return parse_scalar(kPotentials[std::uniform_int_distribution<int>(0, pool - 1)(rng)]);
}

Scalar random_beta(Rng& rng) {
  static const char* const betas[] = {"1/2", "1", "3/2", "2", "3/4", "-1"};
  return parse_scalar(betas[std::uniform_int_distribution<int>(0, 5)(rng)]);
}

// Ray with k_n in {2, 3}, a few tabulated levels and a constant or periodic tail.
GraphFamily random_ray(Rng& rng, bool periodic_allowed = true, int pool = 8) {
  const int levels = std::uniform_int_distribution<int>(1, 3)(rng);
  std::vector<LevelPotentials> table;
  for (int l = 0; l < levels; ++l) {
    LevelPotentials lvl;
    const int k = std::uniform_int_distribution<int>(2, 3)(rng);
    for (int j = 0; j < k; ++j) lvl.push_back(random_potential(rng, pool));
    table.push_back(std::move(lvl));
  }
  const bool periodic = periodic_allowed && levels > 1 && (rng() & 1);
  return GraphFamily::ray(SequenceSpec(std::move(table), periodic ? SequenceSpec::Tail::Periodic
                                                                   : SequenceSpec::Tail::Constant),
                          true);
}

GraphFamily random_z(Rng& rng) {
  std::vector<ZGenerator> gens;
  const long up = std::uniform_int_distribution<long>(1, 3)(rng);
  const long down = std::uniform_int_distribution<long>(1, 3)(rng);
  gens.push_back({up, random_potential(rng, 3)});
  gens.push_back({-down, random_potential(rng, 3)});
  if (rng() & 1) gens.push_back({up + down, random_potential(rng, 3)});
  return GraphFamily::cayley_z(std::move(gens), true);
}

bool in_group(const ClosedSubgroup& g, const Scalar& x) {
  if (x.is_zero()) return true;
  switch (g.kind) {
    case ClosedSubgroup::Kind::Trivial:
      return false;
    case ClosedSubgroup::Kind::Dense:
      return true;
    case ClosedSubgroup::Kind::Lattice:
      if (x.is_exact() && g.generator.is_exact()) {
        auto r = x.exact()->ratio_to(*g.generator.exact());
        return r && denominator(*r) == 1;
      }
      {
        const double q = x.value() / g.generator.value();
        return std::abs(q - std::round(q)) < 1e-9;
      }
  }
  return false;
}

// Smaller than the classifier defaults; the properties compare two runs under
// the same bounds.
TailOptions property_tail_options() {
  TailOptions t;
  t.horizons = {2, 4, 8};
  t.bounds.span = 6;
  t.bounds.mu_len = 6;
  t.bounds.window = 6;
  return t;
}

void record(PropertyOutcome& o, bool ok, const std::string& what) {
  ++o.cases;
  if (ok) return;
  ++o.failures;
  if (o.examples.size() < 5) o.examples.push_back(what);
}

}  // namespace

PropertyOutcome detour_closure_and_symmetry(std::uint64_t seed, int cases) {
  PropertyOutcome o{"detour deltas: closure and symmetry"};
  Rng rng(seed);
  DetourBounds b;
  b.span = 4;
  b.mu_len = 4;
  b.window = 4;
  for (int c = 0; c < cases; ++c) {
    const GraphFamily fam = random_ray(rng);
    const Scalar beta = random_beta(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    const WanderingPath p = typical_path(fam, beta, n + 2 + b.window + b.span, b.mu_len);
    const HorizonDeltaSet set = enumerate_detours(fam, p, n, b, true);
    const ClosedSubgroup g = real_gcd(set.deltas, GcdMode::Exact);
    bool ok = true;
    std::string why;
    // closure: the group generated by the deltas holds every sum of two
    for (std::size_t a = 0; a < set.deltas.size() && ok; ++a)
      for (std::size_t d = a; d < set.deltas.size() && ok; ++d)
        if (!in_group(g, set.deltas[a] + set.deltas[d]) || !in_group(g, -set.deltas[a])) {
          ok = false;
          why = "sum " + set.deltas[a].str() + " + " + set.deltas[d].str() + " outside " + g.str();
        }
    // symmetry: undoing a detour on the modified path has the opposite weight
    if (ok && !set.detours.empty()) {
      const Detour& det = set.detours[std::uniform_int_distribution<std::size_t>(0, set.detours.size() - 1)(rng)];
      WanderingPath q;
      q.graph = p.graph;
      q.arrows.assign(p.arrows.begin(), p.arrows.begin() + static_cast<long>(det.i));
      q.arrows.insert(q.arrows.end(), det.mu.arrows().begin(), det.mu.arrows().end());
      q.arrows.insert(q.arrows.end(), p.arrows.begin() + static_cast<long>(det.j), p.arrows.end());
      const Scalar back =
          q.segment(det.i, det.i + det.mu.length()).potential() - p.segment(det.i, det.j).potential();
      if (!back.same_as(-det.delta)) {
        ok = false;
        why = "reverse detour weight " + back.str() + " vs " + det.delta.str();
      }
    }
    record(o, ok, why);
  }
  return o;
}

PropertyOutcome cocycle_additivity(std::uint64_t seed, int cases) {
  PropertyOutcome o{"cocycle: additivity and antisymmetry"};
  Rng rng(seed);
  for (int c = 0; c < cases; ++c) {
    const GraphFamily fam = random_ray(rng);
    const std::size_t depth = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    const std::size_t len = depth + 4;
    auto word = [&](const std::vector<int>& ids) {
      PathWord w;
      w.arrows = ids;
      for (std::size_t i = 0; i < ids.size(); ++i)
        w.potentials.push_back(fam.sequence().level(i + 1)[static_cast<std::size_t>(ids[i])]);
      return w;
    };
    std::vector<int> q(len), p, r;
    for (std::size_t i = 0; i < len; ++i)
      q[i] = static_cast<int>(rng() % fam.sequence().multiplicity(i + 1));
    p = r = q;
    for (std::size_t i = 0; i < depth; ++i) {
      if (rng() & 1) p[i] = static_cast<int>(rng() % fam.sequence().multiplicity(i + 1));
      if (rng() & 1) r[i] = static_cast<int>(rng() % fam.sequence().multiplicity(i + 1));
    }
    const PathWord P = word(p), Q = word(q), R = word(r);
    const Scalar pq = cocycle_value(P, Q, 0, depth);
    const Scalar qr = cocycle_value(Q, R, 0, depth);
    const Scalar pr = cocycle_value(P, R, 0, depth);
    const Scalar qp = cocycle_value(Q, P, 0, depth);
    const bool add = pr.same_as(pq + qr);
    const bool anti = qp.same_as(-pq);
    const double lhs = std::exp(-pr.value()), rhs = std::exp(-pq.value()) * std::exp(-qr.value());
    const bool mult = std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs));
    record(o, add && anti && mult, "c(p,r)=" + pr.str() + " c(p,q)=" + pq.str() + " c(q,r)=" + qr.str());
  }
  return o;
}

PropertyOutcome gcd_against_rational(std::uint64_t seed, int cases) {
  PropertyOutcome o{"real_gcd against exact rational gcd"};
  Rng rng(seed);
  for (int c = 0; c < cases; ++c) {
    const Rational g(static_cast<long>(rng() % 9 + 1), static_cast<long>(rng() % 7 + 1));
    const bool with_log = rng() & 1;
    const LogRational unit = with_log ? LogRational::log_of(Rational(2)) : LogRational::from_rational(1);
    const std::size_t count = rng() % 5 + 1;
    std::vector<Scalar> exact, approx;
    Rational expected = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const long m = static_cast<long>(rng() % 41) - 20;
      const Rational v = g * m;
      expected = rational_gcd(expected, v);
      exact.emplace_back(unit.scaled(v));
      approx.emplace_back(exact.back().value());
    }
    const ClosedSubgroup ge = real_gcd(exact, GcdMode::Exact);
    const ClosedSubgroup ga = real_gcd(approx, GcdMode::Tolerance);
    bool ok;
    if (expected == 0) {
      ok = ge.kind == ClosedSubgroup::Kind::Trivial && ga.kind == ClosedSubgroup::Kind::Trivial;
    } else {
      const Scalar want(unit.scaled(abs(expected)));
      ok = ge.kind == ClosedSubgroup::Kind::Lattice && ge.generator.same_as(want) &&
           ga.kind == ClosedSubgroup::Kind::Lattice &&
           std::abs(ga.generator.value() - want.value()) <= 1e-9 * want.value();
    }
    record(o, ok, "expected " + to_string(expected) + " got " + ge.str() + " / " + ga.str());
  }
  return o;
}

PropertyOutcome lambda_rescaling(std::uint64_t seed, int cases) {
  PropertyOutcome o{"rescaling invariance of lambda"};
  Rng rng(seed);
  for (int c = 0; c < cases; ++c) {
    const bool ray = rng() & 1;
    const GraphFamily fam = ray ? random_ray(rng, false, 5) : random_z(rng);
    const Rational cf(static_cast<long>(rng() % 5 + 1), static_cast<long>(rng() % 4 + 1));
    const Scalar beta = ray ? random_beta(rng) : parse_scalar(std::to_string(rng() % 3 + 2));
    const Scalar cs = Scalar::rational(cf);
    const Scalar beta_c = Scalar::rational(1 / cf) * beta;
    std::string why;
    bool ok = true;
    try {
      ClassificationRequest a{fam, beta};
      ClassificationRequest b{fam.rescaled(cs), beta_c};
      a.mode = b.mode = ClassifyMode::Detour;
      a.tail = b.tail = property_tail_options();
      const FactorVerdict va = classify(a), vb = classify(b);
      ok = va.type == vb.type;
      if (ok && va.log_lambda && vb.log_lambda) ok = va.log_lambda->same_as(*vb.log_lambda);
      why = std::string(factor_type_name(va.type)) + " " + va.lambda_text + " vs " +
            std::string(factor_type_name(vb.type)) + " " + vb.lambda_text;
    } catch (const Error& e) {
      ok = false;
      why = e.what();
    }
    record(o, ok, why);
  }
  return o;
}

PropertyOutcome tail_shift_invariance(std::uint64_t seed, int cases) {
  PropertyOutcome o{"tail_semigroup: shift invariance"};
  Rng rng(seed);
  const TailOptions opts = property_tail_options();
  for (int c = 0; c < cases; ++c) {
    const GraphFamily fam = random_ray(rng, true, 5);
    const Scalar beta = random_beta(rng);
    const std::size_t shift = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    const GraphFamily moved = GraphFamily::ray(fam.sequence().shifted(shift), true);
    const DetourSemigroup a = tail_semigroup(fam, beta, opts);
    const DetourSemigroup b = tail_semigroup(moved, beta, opts);
    bool ok = a.kind == b.kind;
    if (ok && a.kind == DetourSemigroup::Kind::SGeometric) ok = a.alpha.same_as(b.alpha);
    record(o, ok, a.str() + " vs shifted by " + std::to_string(shift) + ": " + b.str() + " beta " + beta.str() +
                      "\n" + serialize_graph(fam));
  }
  return o;
}

std::vector<PropertyOutcome> semigroup_algebra_suite(std::uint64_t seed, int total_cases) {
  const int each = total_cases / 5;
  return {detour_closure_and_symmetry(seed, each), cocycle_additivity(seed + 1, each),
          gcd_against_rational(seed + 2, each), lambda_rescaling(seed + 3, each),
          tail_shift_invariance(seed + 4, total_cases - 4 * each)};
}

}  // namespace kmsf::testing
