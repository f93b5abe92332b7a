#include "kmsf/detour.hpp"

#include "kmsf/errors.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace kmsf {

namespace {

// Orders Scalars by value, then by exact form, so equal exact numbers collapse.
struct ScalarKey {
  double value;
  std::optional<LogRational> exact;
  explicit ScalarKey(const Scalar& s) : value(s.value()), exact(s.exact()) {}
  friend bool operator<(const ScalarKey& a, const ScalarKey& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.exact.has_value() != b.exact.has_value()) return !a.exact.has_value();
    return a.exact && a.exact->precedes(*b.exact);
  }
};

struct DistinctScalars {
  std::map<ScalarKey, std::pair<Scalar, std::uint64_t>> items;
  void add(const Scalar& s, std::uint64_t count = 1) {
    auto [it, inserted] = items.try_emplace(ScalarKey(s), s, 0);
    const std::uint64_t room = std::numeric_limits<std::uint64_t>::max() - it->second.second;
    it->second.second += std::min(room, count);
  }
};

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > std::numeric_limits<std::uint64_t>::max() - b ? std::numeric_limits<std::uint64_t>::max() : a + b;
}

}  // namespace

// --- wandering paths ----------------------------------------------------------

VertexId WanderingPath::vertex(std::size_t i) const {
  if (i < arrows.size()) return graph.arrow(arrows[i]).source;
  if (i == arrows.size() && !arrows.empty()) return graph.arrow(arrows.back()).range;
  throw InvalidArgument("path index out of range");
}

FinitePath WanderingPath::segment(std::size_t i, std::size_t j) const {
  if (i > j || j > arrows.size()) throw InvalidArgument("bad path segment");
  if (i == j) return FinitePath::at_vertex(graph, vertex(i));
  return FinitePath::from_arrows(graph, std::vector<ArrowId>(arrows.begin() + i, arrows.begin() + j));
}

std::vector<std::size_t> ray_typical_choices(const SequenceSpec& seq, double beta, std::size_t levels) {
  // deficits are tracked per level type: levels with equal potentials share counters
  struct Counters {
    std::vector<double> expected, used;
  };
  std::map<std::string, Counters> by_type;
  std::vector<std::size_t> out;
  out.reserve(levels);
  for (std::size_t n = 1; n <= levels; ++n) {
    const LevelPotentials lvl = seq.level(n);
    std::string key;
    for (const auto& f : lvl) key += f.str() + ";";
    Counters& c = by_type[key];
    c.expected.resize(lvl.size(), 0.0);
    c.used.resize(lvl.size(), 0.0);
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& f : lvl) mx = std::max(mx, -beta * f.value());
    double z = 0.0;
    for (const auto& f : lvl) z += std::exp(-beta * f.value() - mx);
    std::size_t best = 0;
    double best_deficit = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < lvl.size(); ++j) {
      c.expected[j] += std::exp(-beta * lvl[j].value() - mx) / z;
      const double deficit = c.expected[j] - c.used[j];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = j;
      }
    }
    c.used[best] += 1.0;
    out.push_back(best);
  }
  return out;
}

namespace {

std::vector<long> z_period(const std::vector<ZGenerator>& gens) {
  long drift = 0;
  for (const auto& g : gens) drift += g.step;
  std::vector<long> pos;
  std::vector<long> neg;
  for (const auto& g : gens) (g.step > 0 ? pos : neg).push_back(g.step);
  if (drift == 0) {
    pos.push_back(*std::max_element(pos.begin(), pos.end()));
    drift = 1;
  }
  std::vector<long> period;
  if (drift > 0) {
    period = pos;
    period.insert(period.end(), neg.begin(), neg.end());
  } else {
    period = neg;
    period.insert(period.end(), pos.begin(), pos.end());
  }
  return period;
}

}  // namespace

WanderingPath typical_path(const GraphFamily& family, const Scalar& beta, std::size_t length, std::size_t extra) {
  if (length == 0) throw InvalidArgument("typical_path: length must be positive");
  WanderingPath p;
  switch (family.kind()) {
    case FamilyKind::Ray: {
      p.graph = realize_horizon(family, length);
      const auto choice = ray_typical_choices(family.sequence(), beta.value(), length);
      for (std::size_t k = 0; k < length; ++k) p.arrows.push_back(p.graph.out_arrows(k)[choice[k]]);
      p.description = "quasi-typical ray path at beta = " + beta.str();
      return p;
    }
    case FamilyKind::CayleyZ: {
      const auto period = z_period(family.z_generators());
      p.graph = realize_horizon(family, length + extra + 1);
      long x = 0;
      for (std::size_t k = 0; k < length; ++k) {
        const long step = period[k % period.size()];
        const VertexId v = p.graph.require(z_vertex_name(x));
        const std::string label = std::to_string(step);
        bool found = false;
        for (ArrowId a : p.graph.out_arrows(v)) {
          if (p.graph.arrow(a).label == label) {
            p.arrows.push_back(a);
            found = true;
            break;
          }
        }
        if (!found) throw InvalidArgument("typical_path: generator arrow missing");
        x += step;
      }
      std::ostringstream d;
      d << "periodic path (";
      for (std::size_t k = 0; k < period.size(); ++k) d << (k ? "," : "") << (period[k] > 0 ? "+" : "") << period[k];
      d << ")^inf from 0";
      p.description = d.str();
      return p;
    }
    case FamilyKind::CayleyFree:
      throw InvalidArgument("typical paths on free-group Cayley graphs are not provided; use the loop group");
    case FamilyKind::Explicit:
      throw InvalidArgument("finite graphs have no wandering paths");
  }
  return p;
}

std::vector<char> horizon_mask(const GraphFamily& family, const Graph& g, std::size_t n) {
  const Graph h = realize_horizon(family, n);
  std::vector<char> mask(g.vertex_count(), 0);
  for (VertexId v = 0; v < h.vertex_count(); ++v) {
    if (auto w = g.find(h.name(v))) mask[*w] = 1;
  }
  return mask;
}

// --- delta sets ---------------------------------------------------------------

bool HorizonDeltaSet::all_zero() const {
  return std::all_of(deltas.begin(), deltas.end(), [](const Scalar& d) { return d.is_zero(); });
}
bool HorizonDeltaSet::has_positive() const {
  return std::any_of(deltas.begin(), deltas.end(), [](const Scalar& d) { return d.sign() > 0; });
}
bool HorizonDeltaSet::has_negative() const {
  return std::any_of(deltas.begin(), deltas.end(), [](const Scalar& d) { return d.sign() < 0; });
}
std::optional<double> HorizonDeltaSet::min_abs_nonzero() const {
  std::optional<double> m;
  for (const auto& d : deltas) {
    if (d.is_zero()) continue;
    const double a = std::abs(d.value());
    if (!m || a < *m) m = a;
  }
  return m;
}

HorizonDeltaSet enumerate_detours(const GraphFamily& family, const WanderingPath& p, std::size_t n,
                                  const DetourBounds& bounds, bool keep_detours) {
  if (family.kind() == FamilyKind::Explicit || family.kind() == FamilyKind::CayleyFree) {
    throw InvalidArgument("enumerate_detours supports ray and Cayley Z families");
  }
  const Graph& g = p.graph;
  const std::vector<char> mask = horizon_mask(family, g, n);
  const std::size_t len = p.arrows.size();

  // first index from which the realized path never meets H_n
  std::size_t first = len + 1;
  for (std::size_t i = len + 1; i-- > 0;) {
    if (mask[p.vertex(i)]) break;
    first = i;
  }
  if (first + bounds.window + bounds.span > len) {
    throw InvalidArgument("path too short for horizon " + std::to_string(n) + " with the given window and span");
  }

  std::vector<Scalar> prefix{Scalar::rational(0)};
  for (ArrowId a : p.arrows) prefix.push_back(prefix.back() + g.arrow(a).potential);

  HorizonDeltaSet out;
  out.horizon = n;
  out.first_index = first;
  out.bounds = bounds;
  DistinctScalars found;
  std::uint64_t listed = 0;

  for (std::size_t i = first; i < first + bounds.window; ++i) {
    std::multimap<VertexId, std::size_t> targets;
    std::vector<Scalar> seg(bounds.span + 1);
    for (std::size_t j = i + 1; j <= std::min(len, i + bounds.span); ++j) {
      targets.emplace(p.vertex(j), j);
      seg[j - i] = prefix[j] - prefix[i];
    }

    std::map<std::pair<VertexId, ScalarKey>, std::pair<Scalar, std::uint64_t>> frontier;
    frontier.emplace(std::make_pair(p.vertex(i), ScalarKey(Scalar::rational(0))),
                     std::make_pair(Scalar::rational(0), std::uint64_t{1}));
    for (std::size_t m = 0; m <= bounds.mu_len && !frontier.empty(); ++m) {
      std::map<std::pair<VertexId, ScalarKey>, std::pair<Scalar, std::uint64_t>> next;
      for (const auto& [key, val] : frontier) {
        const VertexId v = key.first;
        auto [lo, hi] = targets.equal_range(v);
        for (auto it = lo; it != hi; ++it) found.add(seg[it->second - i] - val.first, val.second);
        if (m == bounds.mu_len) continue;
        for (ArrowId a : g.out_arrows(v)) {
          const Arrow& arr = g.arrow(a);
          if (mask[arr.range]) continue;
          Scalar pot = val.first + arr.potential;
          auto [it, inserted] = next.try_emplace(std::make_pair(arr.range, ScalarKey(pot)), pot, 0);
          it->second.second = saturating_add(it->second.second, val.second);
        }
      }
      frontier.swap(next);
    }

    if (!keep_detours) continue;
    // explicit listing, depth first, for the property checks
    std::vector<ArrowId> mu;
    std::vector<std::pair<VertexId, std::size_t>> stack;  // vertex, next out index
    auto record = [&](VertexId v) {
      auto [lo, hi] = targets.equal_range(v);
      for (auto it = lo; it != hi; ++it) {
        if (++listed > bounds.max_detours) {
          throw ResourceLimit("more than " + std::to_string(bounds.max_detours) + " detours at horizon " +
                              std::to_string(n));
        }
        Detour d;
        d.i = i;
        d.j = it->second;
        d.mu = mu.empty() ? FinitePath::at_vertex(g, p.vertex(i)) : FinitePath::from_arrows(g, mu);
        d.delta = (prefix[d.j] - prefix[i]) - d.mu.potential();
        out.detours.push_back(std::move(d));
      }
    };
    stack.emplace_back(p.vertex(i), 0);
    record(p.vertex(i));
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      auto outs = g.out_arrows(v);
      bool descended = false;
      while (next < outs.size() && mu.size() < bounds.mu_len) {
        const ArrowId a = outs[next++];
        if (mask[g.arrow(a).range]) continue;
        mu.push_back(a);
        const VertexId w = g.arrow(a).range;
        stack.emplace_back(w, 0);
        record(w);
        descended = true;
        break;
      }
      if (!descended) {
        stack.pop_back();
        if (!mu.empty() && stack.size() == mu.size()) mu.pop_back();
      }
    }
  }

  for (auto& [key, val] : found.items) {
    out.deltas.push_back(val.first);
    out.counts.push_back(val.second);
  }
  return out;
}

// --- real gcd -----------------------------------------------------------------

std::string ClosedSubgroup::str() const {
  switch (kind) {
    case Kind::Trivial:
      return "trivial";
    case Kind::Lattice:
      return "lattice(" + generator.str() + ")";
    case Kind::Dense:
      return "dense";
  }
  return "?";
}

bool ClosedSubgroup::same_as(const ClosedSubgroup& o) const {
  if (kind != o.kind) return false;
  if (kind != Kind::Lattice) return true;
  if (generator.is_exact() && o.generator.is_exact()) return generator.same_as(o.generator);
  const double a = generator.value();
  const double b = o.generator.value();
  return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

ClosedSubgroup real_gcd(const std::vector<Scalar>& deltas, GcdMode mode, double eps) {
  ClosedSubgroup out;
  if (mode == GcdMode::Exact) {
    out.exact = true;
    std::vector<const Scalar*> nonzero;
    for (const auto& d : deltas) {
      if (!d.is_exact()) throw InvalidArgument("exact real_gcd needs exact inputs, got " + d.str());
      if (!d.is_zero()) nonzero.push_back(&d);
    }
    if (nonzero.empty()) return out;
    const LogRational& base = *nonzero.front()->exact();
    Rational g = 0;
    for (const Scalar* d : nonzero) {
      auto q = d->exact()->ratio_to(base);
      if (!q) {
        out.kind = ClosedSubgroup::Kind::Dense;
        out.witness = {*nonzero.front(), *d};
        return out;
      }
      g = rational_gcd(g, *q);
    }
    LogRational alpha = base.scaled(g);
    if (alpha.sign() < 0) alpha = -alpha;
    out.kind = ClosedSubgroup::Kind::Lattice;
    out.generator = Scalar(alpha);
    for (const Scalar* d : nonzero) out.witness.push_back(*d);
    return out;
  }

  double maxabs = 0.0;
  for (const auto& d : deltas) maxabs = std::max(maxabs, std::abs(d.value()));
  const double eta = 64.0 * DBL_EPSILON * maxabs;
  std::vector<double> nonzero;
  std::vector<Scalar> wit;
  for (const auto& d : deltas) {
    if (std::abs(d.value()) > eta) {
      nonzero.push_back(std::abs(d.value()));
      wit.push_back(d);
    }
  }
  if (nonzero.empty()) return out;
  double g = nonzero.front();
  for (std::size_t k = 1; k < nonzero.size(); ++k) {
    double a = std::max(g, nonzero[k]);
    double b = std::min(g, nonzero[k]);
    while (b > eta) {
      double r = std::fmod(a, b);
      if (r <= eta || b - r <= eta) r = 0.0;
      if (r != 0.0 && r < eps) {
        out.kind = ClosedSubgroup::Kind::Dense;
        out.witness = {wit.front(), wit[k]};
        return out;
      }
      a = b;
      b = r;
    }
    g = a;
    if (g < eps) {
      out.kind = ClosedSubgroup::Kind::Dense;
      out.witness = {wit.front(), wit[k]};
      return out;
    }
  }
  out.kind = ClosedSubgroup::Kind::Lattice;
  out.generator = Scalar(g);
  out.witness = std::move(wit);
  return out;
}

// --- semigroups ---------------------------------------------------------------

double DetourSemigroup::s() const {
  switch (kind) {
    case Kind::SMinus1:
      return -1.0;
    case Kind::SZero:
      return 0.0;
    case Kind::SGeometric:
      return std::exp(-alpha.value());
    case Kind::SFull:
      return 1.0;
  }
  return -1.0;
}

std::string_view semigroup_kind_name(DetourSemigroup::Kind k) {
  switch (k) {
    case DetourSemigroup::Kind::SMinus1:
      return "S(-1)";
    case DetourSemigroup::Kind::SZero:
      return "S(0)";
    case DetourSemigroup::Kind::SGeometric:
      return "S(s)";
    case DetourSemigroup::Kind::SFull:
      return "S(1)";
  }
  return "?";
}

std::string exp_text(const Scalar& x) {
  if (x.is_exact()) {
    if (auto q = x.exact()->exp_rational()) {
      std::ostringstream os;
      os << *q;
      return os.str();
    }
    return "exp(" + x.exact()->str() + ")";
  }
  std::ostringstream os;
  os.precision(17);
  os << std::exp(x.value());
  return os.str();
}

std::string DetourSemigroup::str() const {
  switch (kind) {
    case Kind::SMinus1:
      return "S(-1) = {1}";
    case Kind::SZero:
      return "S(0) = {0,1}";
    case Kind::SGeometric:
      return "S(s) = {0} ∪ {s^z : z ∈ ℤ}, s = " + exp_text(-alpha);
    case Kind::SFull:
      return "S(1) = [0,∞)";
  }
  return "?";
}

std::string_view confidence_name(Confidence c) {
  switch (c) {
    case Confidence::Structural:
      return "structural";
    case Confidence::Numeric:
      return "numeric";
    case Confidence::Undecided:
      return "undecided";
  }
  return "?";
}

double unboundedness_threshold(std::size_t horizon) { return 3.0 * static_cast<double>(horizon); }

ZeroMembership zero_membership(const std::vector<HorizonDeltaSet>& sets, const std::vector<ClosedSubgroup>& groups) {
  ZeroMembership z;
  if (sets.empty() || sets.size() != groups.size()) {
    z.reason = "no horizon data";
    return z;
  }
  if (std::all_of(sets.begin(), sets.end(), [](const HorizonDeltaSet& s) { return s.all_zero(); })) {
    z.value = false;
    z.confidence = Confidence::Structural;
    z.reason = "every delta vanishes at every horizon";
    return z;
  }
  auto two_sided = [](const HorizonDeltaSet& s) { return s.has_positive() && s.has_negative(); };
  const std::size_t n_two = std::count_if(sets.begin(), sets.end(), two_sided);
  if (n_two == 0) {
    z.value = false;
    z.confidence = Confidence::Numeric;
    z.reason = "nonzero deltas take a single sign at every horizon";
    return z;
  }
  if (n_two != sets.size()) {
    z.reason = "deltas are two-sided at some horizons only";
    return z;
  }
  const bool nontrivial = std::all_of(groups.begin(), groups.end(), [](const ClosedSubgroup& g) {
    return g.kind != ClosedSubgroup::Kind::Trivial;
  });
  const bool stable = std::all_of(groups.begin(), groups.end(), [&](const ClosedSubgroup& g) {
    return g.same_as(groups.front());
  });
  if (nontrivial && stable) {
    z.value = true;
    z.confidence = Confidence::Structural;
    z.reason = "group " + groups.front().str() + " persists outside every scheduled horizon";
    return z;
  }
  bool escaping = true;
  for (const auto& s : sets) {
    auto m = s.min_abs_nonzero();
    if (!m || *m <= unboundedness_threshold(s.horizon)) escaping = false;
  }
  if (escaping) {
    z.value = true;
    z.confidence = Confidence::Numeric;
    z.reason = "smallest nonzero |delta| exceeds 3*horizon at every horizon (heuristic)";
    return z;
  }
  z.reason = "group does not stabilize and deltas do not escape";
  return z;
}

DetourSemigroup classify_semigroup(const ClosedSubgroup& subgroup, bool zero) {
  DetourSemigroup s;
  s.group = subgroup;
  switch (subgroup.kind) {
    case ClosedSubgroup::Kind::Trivial:
      s.kind = zero ? DetourSemigroup::Kind::SZero : DetourSemigroup::Kind::SMinus1;
      return s;
    case ClosedSubgroup::Kind::Lattice:
      if (!zero) throw Inconsistency("a lattice of detour weights forces 0 into the semigroup");
      s.kind = DetourSemigroup::Kind::SGeometric;
      s.alpha = subgroup.generator;
      return s;
    case ClosedSubgroup::Kind::Dense:
      if (!zero) throw Inconsistency("a dense group of detour weights forces 0 into the semigroup");
      s.kind = DetourSemigroup::Kind::SFull;
      return s;
  }
  return s;
}

// --- loop groups --------------------------------------------------------------

LoopGroupResult loop_difference_group(const Graph& g, VertexId base, std::size_t max_length, GcdMode mode) {
  if (base >= g.vertex_count()) throw InvalidArgument("loop base outside graph");
  if (max_length == 0) throw InvalidArgument("max loop length must be positive");
  // distance back to base, for pruning
  const std::size_t inf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> back(g.vertex_count(), inf);
  std::deque<VertexId> queue{base};
  back[base] = 0;
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    for (ArrowId a : g.in_arrows(v)) {
      VertexId u = g.arrow(a).source;
      if (back[u] == inf) {
        back[u] = back[v] + 1;
        queue.push_back(u);
      }
    }
  }

  LoopGroupResult res;
  res.max_length = max_length;
  std::vector<Scalar> loops;
  std::set<ScalarKey> seen;
  std::vector<ClosedSubgroup> history;
  std::map<std::pair<VertexId, ScalarKey>, Scalar> frontier;
  frontier.emplace(std::make_pair(base, ScalarKey(Scalar::rational(0))), Scalar::rational(0));
  for (std::size_t m = 1; m <= max_length; ++m) {
    std::map<std::pair<VertexId, ScalarKey>, Scalar> next;
    for (const auto& [key, pot] : frontier) {
      for (ArrowId a : g.out_arrows(key.first)) {
        const Arrow& arr = g.arrow(a);
        if (back[arr.range] == inf || back[arr.range] > max_length - m) continue;
        Scalar q = pot + arr.potential;
        next.try_emplace(std::make_pair(arr.range, ScalarKey(q)), q);
      }
    }
    frontier.swap(next);
    bool grew = false;
    for (const auto& [key, pot] : frontier) {
      if (key.first != base) continue;
      ++res.loops_examined;
      if (pot.sign() <= 0) res.all_positive = false;
      if (pot.sign() >= 0) res.all_negative = false;
      if (seen.insert(key.second).second) {
        loops.push_back(pot);
        grew = true;
      }
    }
    if (grew || history.empty()) {
      history.push_back(real_gcd(loops, mode));
    } else {
      history.push_back(history.back());
    }
  }
  if (loops.empty()) {
    res.all_positive = false;
    res.all_negative = false;
  }
  res.group = history.back();
  std::size_t stable_from = max_length;
  while (stable_from > 1 && history[stable_from - 2].same_as(res.group)) --stable_from;
  res.stabilized_at = stable_from;
  res.at_horizon = loops.empty() || 2 * stable_from > max_length;
  return res;
}

LoopGroupResult loop_difference_group(const GraphFamily& family, std::size_t max_length, GcdMode mode) {
  if (family.kind() != FamilyKind::CayleyZ && family.kind() != FamilyKind::CayleyFree) {
    throw InvalidArgument("loop_difference_group on a family needs a Cayley preset");
  }
  const Graph ball = realize_horizon(family, (max_length + 1) / 2);
  const VertexId base = ball.require(family.kind() == FamilyKind::CayleyZ ? z_vertex_name(0) : free_word_name({}));
  return loop_difference_group(ball, base, max_length, mode);
}

bool family_is_exact(const GraphFamily& family) {
  const auto pots = family.sample_potentials(24);
  return std::all_of(pots.begin(), pots.end(), [](const Scalar& s) { return s.is_exact(); });
}

ThetaResult theta_F(const GraphFamily& family, std::size_t max_length, GcdMode mode) {
  if (mode == GcdMode::Exact && !family_is_exact(family)) mode = GcdMode::Tolerance;
  ThetaResult t;
  t.loops = loop_difference_group(family, max_length, mode);
  if (!t.loops.all_positive && !t.loops.all_negative) {
    t.kind = ThetaResult::Kind::NoKms;
    t.text = "no KMS states: loop potentials at the identity are not all of one strict sign";
    return t;
  }
  switch (t.loops.group.kind) {
    case ClosedSubgroup::Kind::Lattice:
      t.kind = ThetaResult::Kind::Value;
      t.theta = -t.loops.group.generator;
      t.text = "theta_F = " + t.theta.str();
      break;
    case ClosedSubgroup::Kind::Dense:
      t.kind = ThetaResult::Kind::Dense;
      t.theta = Scalar::rational(0);
      t.text = "dense (λ = 1)";
      break;
    case ClosedSubgroup::Kind::Trivial:
      t.kind = ThetaResult::Kind::NoKms;
      t.text = "no KMS states: no loops with nonzero potential";
      break;
  }
  return t;
}

// --- tail semigroup -----------------------------------------------------------

namespace {

constexpr std::size_t kMaxWindow = 512;

// Start positions needed before the quasi-typical path has used every arrow
// of a constant or periodic tail at least once.
std::size_t covering_window(const SequenceSpec& seq, double beta, std::size_t base, std::size_t first_level) {
  const std::size_t period = seq.tail_period();
  if (period == 0) return base;
  double fmin = 1.0;
  for (std::size_t r = 0; r < period; ++r) {
    const LevelPotentials lvl = seq.level(first_level + r);
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& f : lvl) mx = std::max(mx, -beta * f.value());
    double z = 0.0;
    for (const auto& f : lvl) z += std::exp(-beta * f.value() - mx);
    for (const auto& f : lvl) fmin = std::min(fmin, std::exp(-beta * f.value() - mx) / z);
  }
  const double need = std::ceil(static_cast<double>(period) / fmin) + 2.0 * static_cast<double>(period);
  if (!(need < static_cast<double>(kMaxWindow))) return std::max(base, kMaxWindow);
  return std::max(base, static_cast<std::size_t>(need));
}

}  // namespace

DetourSemigroup tail_semigroup(const GraphFamily& family, const Scalar& beta, const TailOptions& opts) {
  if (family.kind() != FamilyKind::Ray) throw InvalidArgument("tail_semigroup needs a ray family");
  if (opts.horizons.empty()) throw InvalidArgument("empty horizon schedule");
  const GcdMode mode = opts.mode.value_or(family_is_exact(family) ? GcdMode::Exact : GcdMode::Tolerance);
  const std::size_t nmax = *std::max_element(opts.horizons.begin(), opts.horizons.end());
  DetourBounds b = opts.bounds;
  std::vector<std::string> diag;
  const std::size_t widened =
      covering_window(family.sequence(), beta.value(), b.window, family.sequence().tail_start() + 1);
  if (widened > b.window) {
    diag.push_back("window widened from " + std::to_string(b.window) + " to " + std::to_string(widened) +
                   " so every tail arrow occurs on the typical path" +
                   (widened >= kMaxWindow ? " (capped; rare arrows may be missed)" : ""));
    b.window = widened;
  }
  const WanderingPath p = typical_path(family, beta, nmax + 2 + b.window + b.span, b.mu_len);

  std::vector<HorizonDeltaSet> sets;
  std::vector<ClosedSubgroup> groups;
  for (std::size_t n : opts.horizons) {
    HorizonDeltaSet set = enumerate_detours(family, p, n, b);
    ClosedSubgroup grp = real_gcd(set.deltas, mode);
    if (mode == GcdMode::Exact) {
      ClosedSubgroup approx = real_gcd(set.deltas, GcdMode::Tolerance);
      if (approx.kind != grp.kind) {
        diag.push_back("warning: horizon " + std::to_string(n) + " float real-gcd says " + approx.str() +
                       ", exact says " + grp.str() + "; exact wins");
      }
    }
    std::ostringstream line;
    line << "H_" << n << ": " << set.deltas.size() << " distinct deltas from i >= " << set.first_index
         << ", group " << grp.str() << ", signs " << (set.has_negative() ? "-" : "") << (set.has_positive() ? "+" : "");
    if (auto m = set.min_abs_nonzero()) line << ", min |delta| " << *m;
    diag.push_back(line.str());
    sets.push_back(std::move(set));
    groups.push_back(std::move(grp));
  }

  const ZeroMembership zm = zero_membership(sets, groups);
  diag.push_back("0 in semigroup: " + std::string(zm.value ? (*zm.value ? "yes" : "no") : "undecided") + " (" +
                 std::string(confidence_name(zm.confidence)) + ": " + zm.reason + ")");

  std::ostringstream sched;
  for (std::size_t k = 0; k < opts.horizons.size(); ++k) sched << (k ? "," : "") << opts.horizons[k];
  const std::string bounds_txt = "horizons {" + sched.str() + "}, span " + std::to_string(b.span) + ", mu length " +
                                 std::to_string(b.mu_len);

  DetourSemigroup out;
  if (!zm.value) {
    out.stabilized = false;
    out.tag = "at-horizon: " + zm.reason + "; " + bounds_txt;
    out.diagnostics = std::move(diag);
    return out;
  }
  const bool stable = std::all_of(groups.begin(), groups.end(), [&](const ClosedSubgroup& g) {
    return g.same_as(groups.front());
  });
  if (!*zm.value) {
    out = classify_semigroup(ClosedSubgroup{}, false);
  } else if (stable && groups.front().kind != ClosedSubgroup::Kind::Trivial) {
    out = classify_semigroup(groups.front(), true);
  } else {
    out = classify_semigroup(ClosedSubgroup{}, true);
    out.diagnostics.push_back("tail groups degenerate; limit group trivial");
  }
  out.stabilized = true;
  out.tag = std::string(zm.confidence == Confidence::Structural ? "stable" : "numeric") + " over " + bounds_txt;
  out.diagnostics.insert(out.diagnostics.begin(), diag.begin(), diag.end());
  return out;
}

}  // namespace kmsf
