#include "kmsf/orbits.hpp"

#include "kmsf/errors.hpp"
#include "kmsf/exits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace kmsf {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SplitMix64 SplitMix64::for_sample(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 a(seed);
  const std::uint64_t s = a.next();
  SplitMix64 b(index ^ s);
  return SplitMix64(b.next() ^ (s << 1));
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::size_t SplitMix64::below(std::size_t n) { return n <= 1 ? 0 : static_cast<std::size_t>(uniform() * n) % n; }

namespace {

// Arrow alphabet and potentials seen by the sampler. For rays the alphabet
// depends on the position (level), for Cayley graphs it does not.
struct Alphabet {
  bool positional = false;
  std::vector<std::vector<Scalar>> pot;    // [level][id] or [0][gen]
  std::vector<std::vector<double>> prob;   // normalized step weights at beta
  std::vector<std::vector<int>> loops;     // Cayley: minimal loop words

  std::size_t slot(std::size_t pos) const { return positional ? pos : 0; }
  std::size_t size(std::size_t pos) const { return pot[slot(pos)].size(); }
  const Scalar& potential(std::size_t pos, int id) const { return pot[slot(pos)][static_cast<std::size_t>(id)]; }
  double weight(std::size_t pos, int id) const {
    const auto& pr = prob[slot(pos)];
    return pr[static_cast<std::size_t>(id)] * static_cast<double>(pr.size());
  }
};

std::vector<double> step_weights(const std::vector<Scalar>& pots, const Scalar& beta) {
  return product_vector(pots, beta).p;
}

// Balanced step multisets of total length <= max_len, written positives first.
std::vector<std::vector<int>> z_loops(const std::vector<ZGenerator>& gens, std::size_t max_len) {
  std::vector<std::vector<int>> out;
  std::vector<int> counts(gens.size(), 0);
  auto rec = [&](auto&& self, std::size_t g, std::size_t used, long sum) -> void {
    if (g == gens.size()) {
      if (used == 0 || sum != 0) return;
      std::vector<int> word;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < gens.size(); ++i)
          if ((gens[i].step > 0) == (pass == 0))
            for (int c = 0; c < counts[i]; ++c) word.push_back(static_cast<int>(i));
      out.push_back(std::move(word));
      return;
    }
    for (std::size_t c = 0; used + c <= max_len; ++c) {
      counts[g] = static_cast<int>(c);
      self(self, g + 1, used + c, sum + static_cast<long>(c) * gens[g].step);
    }
    counts[g] = 0;
  };
  rec(rec, 0, 0, 0);
  return out;
}

std::vector<std::vector<int>> free_loops(const std::vector<FreeGenerator>& gens) {
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = 0; j < gens.size(); ++j)
      if (gens[i].letter == gens[j].letter && gens[i].sign == -gens[j].sign)
        out.push_back({static_cast<int>(i), static_cast<int>(j)});
  return out;
}

constexpr std::size_t kZLoopLength = 8;

Alphabet make_alphabet(const GraphFamily& family, const Scalar& beta, std::size_t levels) {
  Alphabet a;
  switch (family.kind()) {
    case FamilyKind::Ray: {
      a.positional = true;  // level n sits at position n-1
      for (std::size_t n = 1; n <= levels; ++n) a.pot.push_back(family.sequence().level(n));
      break;
    }
    case FamilyKind::CayleyZ: {
      std::vector<Scalar> pots;
      for (const auto& g : family.z_generators()) pots.push_back(g.potential);
      a.pot.push_back(std::move(pots));
      a.loops = z_loops(family.z_generators(), kZLoopLength);
      break;
    }
    case FamilyKind::CayleyFree: {
      std::vector<Scalar> pots;
      for (const auto& g : family.free_generators()) pots.push_back(g.potential);
      a.pot.push_back(std::move(pots));
      a.loops = free_loops(family.free_generators());
      break;
    }
    case FamilyKind::Explicit:
      throw InvalidArgument("orbit sampling needs a ray or Cayley family");
  }
  for (const auto& pots : a.pot) a.prob.push_back(step_weights(pots, beta));
  return a;
}

struct RawPair {
  std::vector<int> p, q;
  long k = 0;
  double weight = 1.0;
  bool diagonal = true;
};

// One sample: q drawn from a uniform proposal, p obtained from q by at most
// `depth` local substitutions inside the first `depth` positions.
RawPair draw(const Alphabet& a, std::size_t depth, std::size_t tail, double rate, SplitMix64& rng) {
  RawPair r;
  const std::size_t len = depth + tail;
  r.q.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    r.q[i] = static_cast<int>(rng.below(a.size(i)));
    if (i < depth) r.weight *= a.weight(i, r.q[i]);
  }
  if (a.positional) {
    r.p = r.q;
    for (std::size_t i = 0; i < depth; ++i) {
      if (rng.uniform() >= rate) continue;
      r.p[i] = static_cast<int>(rng.below(a.size(i)));
      r.weight *= a.weight(i, r.p[i]);
      if (r.p[i] != r.q[i]) r.diagonal = false;
    }
    return r;
  }
  if (a.loops.empty()) {
    r.p = r.q;
    return r;
  }
  std::size_t i = 0;
  while (i < depth) {
    if (rng.uniform() >= rate) {
      r.p.push_back(r.q[i++]);
      continue;
    }
    const auto& loop = a.loops[rng.below(a.loops.size())];
    const bool remove = rng.uniform() < 0.5 && i + loop.size() <= depth &&
                        std::equal(loop.begin(), loop.end(), r.q.begin() + static_cast<long>(i));
    if (remove) {
      i += loop.size();
      r.k -= static_cast<long>(loop.size());
    } else {
      for (int y : loop) {
        r.p.push_back(y);
        r.weight *= a.weight(0, y);
      }
      r.k += static_cast<long>(loop.size());
      r.p.push_back(r.q[i++]);
    }
    r.diagonal = false;
  }
  r.p.insert(r.p.end(), r.q.begin() + static_cast<long>(depth), r.q.end());
  return r;
}

double raw_cocycle(const Alphabet& a, const RawPair& r, std::size_t depth) {
  const std::size_t pend = static_cast<std::size_t>(static_cast<long>(depth) + r.k);
  double c = 0.0;
  for (std::size_t i = 0; i < pend; ++i) c += a.potential(i, r.p[i]).value();
  for (std::size_t i = 0; i < depth; ++i) c -= a.potential(i, r.q[i]).value();
  return c;
}

void check_options(const SamplerOptions& opts) {
  if (opts.depth == 0) throw InvalidArgument("sampling depth must be positive");
  if (!(opts.substitution_rate > 0.0 && opts.substitution_rate <= 1.0))
    throw InvalidArgument("substitution rate must lie in (0, 1]");
}

unsigned worker_count(const SamplerOptions& opts, std::size_t n) {
  unsigned w = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(1, n / 4096)));
}

}  // namespace

std::vector<OrbitPair> sample_pairs(const GraphFamily& family, const Scalar& beta, std::size_t n_samples,
                                    const SamplerOptions& opts) {
  check_options(opts);
  const Alphabet a = make_alphabet(family, beta, opts.depth + opts.tail);
  std::vector<OrbitPair> out;
  out.reserve(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    SplitMix64 rng = SplitMix64::for_sample(opts.seed, s);
    RawPair r = draw(a, opts.depth, opts.tail, opts.substitution_rate, rng);
    OrbitPair op;
    auto fill = [&](PathWord& w, const std::vector<int>& ids) {
      w.arrows = ids;
      for (std::size_t i = 0; i < ids.size(); ++i) w.potentials.push_back(a.potential(i, ids[i]));
    };
    fill(op.p, r.p);
    fill(op.q, r.q);
    op.k = r.k;
    op.match_from = opts.depth;
    op.c = cocycle_value(op.p, op.q, op.k, op.match_from);
    op.d_beta = std::exp(-beta.value() * op.c.value());
    op.weight = r.weight;
    out.push_back(std::move(op));
  }
  return out;
}

Scalar cocycle_value(const PathWord& p, const PathWord& q, long k, std::size_t match_from) {
  if (p.potentials.size() != p.arrows.size() || q.potentials.size() != q.arrows.size())
    throw InvalidArgument("path word without potentials");
  if (static_cast<long>(match_from) + k < 0) throw InvalidArgument("shift runs before the start of p");
  std::size_t last = match_from;
  for (std::size_t i = match_from; i < q.size(); ++i) {
    const long j = static_cast<long>(i) + k;
    if (static_cast<std::size_t>(j) >= p.size()) break;
    if (p.arrows[static_cast<std::size_t>(j)] != q.arrows[i] ||
        !p.potentials[static_cast<std::size_t>(j)].same_as(q.potentials[i]))
      throw Inconsistency("paths are not tail equivalent with shift " + std::to_string(k) + " from index " +
                          std::to_string(match_from));
    last = i + 1;
  }
  auto at = [&](std::size_t n) {
    Scalar c(0.0);
    const std::size_t pend = static_cast<std::size_t>(static_cast<long>(n) + k);
    if (pend > p.size() || n > q.size()) throw InvalidArgument("path word too short");
    bool exact = true;
    for (std::size_t i = 0; i < pend; ++i) exact = exact && p.potentials[i].is_exact();
    for (std::size_t i = 0; i < n; ++i) exact = exact && q.potentials[i].is_exact();
    if (exact) {
      c = Scalar::rational(0);
      for (std::size_t i = 0; i < pend; ++i) c = c + p.potentials[i];
      for (std::size_t i = 0; i < n; ++i) c = c - q.potentials[i];
    } else {
      double s = 0.0;
      for (std::size_t i = 0; i < pend; ++i) s += p.potentials[i].value();
      for (std::size_t i = 0; i < n; ++i) s -= q.potentials[i].value();
      c = Scalar(s);
    }
    return c;
  };
  const Scalar c1 = at(match_from);
  const Scalar c2 = at(last);
  const bool agree = (c1.is_exact() && c2.is_exact())
                         ? c1.same_as(c2)
                         : std::abs(c1.value() - c2.value()) <= 1e-12 * (1.0 + std::abs(c1.value()));
  if (!agree) throw Inconsistency("cocycle depends on n: " + c1.str() + " vs " + c2.str());
  return c1;
}

double RangeHistogram::total_mass() const {
  double t = mass_to_zero + mass_to_infinity;
  for (const auto& [_, b] : bins) t += b.mass;
  return t;
}

std::vector<SampledValue> sample_cocycle_values(const GraphFamily& family, const Scalar& beta,
                                                std::size_t n_samples, const SamplerOptions& opts) {
  check_options(opts);
  const Alphabet a = make_alphabet(family, beta, opts.depth + opts.tail);
  std::vector<SampledValue> out(n_samples);
  const unsigned workers = worker_count(opts, n_samples);
  auto run = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s) {
      SplitMix64 rng = SplitMix64::for_sample(opts.seed, s);
      const RawPair r = draw(a, opts.depth, 0, opts.substitution_rate, rng);
      out[s] = {raw_cocycle(a, r, opts.depth), r.weight, r.diagonal};
    }
  };
  if (workers <= 1) {
    run(0, n_samples);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_samples + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk, hi = std::min(n_samples, lo + chunk);
      if (lo < hi) pool.emplace_back(run, lo, hi);
    }
    for (auto& t : pool) t.join();
  }
  return out;
}

RangeHistogram build_histogram(const std::vector<SampledValue>& values, double scale) {
  RangeHistogram h;
  h.beta = scale;
  double total = 0.0;
  for (const auto& v : values) total += v.weight;
  if (!(total > 0.0)) throw NumericOverflow("importance weights vanished");
  for (const auto& v : values) {
    ++h.samples;
    if (v.diagonal) ++h.diagonal;
    h.max_abs_c = std::max(h.max_abs_c, std::abs(v.c));
    const double m = v.weight / total;
    const double logd = -scale * v.c;
    if (logd < -kLogEscape) {
      h.mass_to_zero += m;
    } else if (logd > kLogEscape) {
      h.mass_to_infinity += m;
    } else {
      auto& b = h.bins[std::lround(logd / kBinWidth)];
      b.mass += m;
      ++b.count;
    }
  }
  h.low_confidence = h.samples < kSampleFloor;
  if (h.low_confidence)
    h.warnings.push_back("only " + std::to_string(h.samples) + " samples, below the floor of " +
                         std::to_string(kSampleFloor));
  if (h.samples > 0 && h.diagonal == h.samples)
    h.warnings.push_back("no alternative segment exists: every sampled pair is diagonal");
  return h;
}

RangeHistogram sample_histogram(const GraphFamily& family, const Scalar& beta, std::size_t n_samples,
                                const SamplerOptions& opts) {
  return build_histogram(sample_cocycle_values(family, beta, n_samples, opts), beta.value());
}

RangeEstimate essential_range_estimate(const RangeHistogram& hist, double delta) {
  RangeEstimate e;
  e.low_confidence = hist.low_confidence;
  e.mass_to_zero = hist.mass_to_zero >= delta;
  e.mass_to_infinity = hist.mass_to_infinity >= delta;
  // adjacent bins form one cluster; a cluster counts when its mass reaches delta
  long prev = 0;
  double mass = 0.0, moment = 0.0;
  bool open = false;
  auto close = [&] {
    if (open && mass >= delta) {
      e.log_points.push_back(moment / mass * kBinWidth);
      e.masses.push_back(mass);
    }
    mass = moment = 0.0;
  };
  for (const auto& [key, b] : hist.bins) {
    if (!open || key != prev + 1) {
      close();
      open = true;
    }
    mass += b.mass;
    moment += b.mass * static_cast<double>(key);
    prev = key;
  }
  close();
  return e;
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

AgreementReport compare_to_prediction(const RangeEstimate& est, const DetourSemigroup& sem, const Scalar& beta,
                                      std::optional<long> z_window) {
  AgreementReport r;
  const double b = std::abs(beta.value());
  auto mismatch = [&](std::string m) {
    r.agree = false;
    r.mismatches.push_back(std::move(m));
  };
  switch (sem.kind) {
    case DetourSemigroup::Kind::SMinus1:
    case DetourSemigroup::Kind::SZero: {
      r.predicted_log = {0.0};
      for (double x : est.log_points)
        if (std::abs(x) > kMatchTolerance) mismatch("detected log D = " + fmt(x) + " outside {0}");
      if (est.log_points.empty()) mismatch("no detected mass at D = 1");
      break;
    }
    case DetourSemigroup::Kind::SGeometric: {
      const double step = sem.alpha.value() * b;
      if (!(step > 0.0)) {
        mismatch("degenerate lattice step");
        break;
      }
      long zmax = 0;
      for (double x : est.log_points) {
        const double z = std::round(x / step);
        if (std::abs(x - z * step) > kMatchTolerance)
          mismatch("detected log D = " + fmt(x) + " is not a multiple of " + fmt(step));
        else
          zmax = std::max(zmax, static_cast<long>(std::abs(z)));
      }
      const long w = z_window.value_or(zmax);
      for (long z = -w; z <= w; ++z) {
        const double target = static_cast<double>(z) * step;
        r.predicted_log.push_back(target);
        const bool hit = std::any_of(est.log_points.begin(), est.log_points.end(),
                                     [&](double x) { return std::abs(x - target) <= kMatchTolerance; });
        if (!hit) mismatch("predicted log D = " + fmt(target) + " (z = " + std::to_string(z) + ") not detected");
      }
      break;
    }
    case DetourSemigroup::Kind::SFull: {
      if (est.log_points.size() >= 2) {
        double gap = 0.0;
        for (std::size_t i = 1; i < est.log_points.size(); ++i)
          gap = std::max(gap, est.log_points[i] - est.log_points[i - 1]);
        r.max_gap = gap;
      }
      break;
    }
  }
  std::ostringstream os;
  os << (r.agree ? "agree" : "disagree") << " with " << sem.str() << " at beta = " << beta.str();
  if (!r.mismatches.empty()) os << " (" << r.mismatches.size() << " mismatches)";
  r.summary = os.str();
  return r;
}

std::string histogram_csv(const RangeHistogram& hist) {
  std::ostringstream os;
  os.precision(17);
  os << "bin_log_center,mass\n";
  if (hist.mass_to_zero > 0) os << "-inf," << hist.mass_to_zero << '\n';
  for (const auto& [key, b] : hist.bins) os << static_cast<double>(key) * kBinWidth << ',' << b.mass << '\n';
  if (hist.mass_to_infinity > 0) os << "inf," << hist.mass_to_infinity << '\n';
  return os.str();
}

std::string range_report(const RangeHistogram& hist, const RangeEstimate& est, const AgreementReport& agreement) {
  std::ostringstream os;
  os.precision(10);
  os << "samples: " << hist.samples << " (diagonal " << hist.diagonal << ")\n";
  os << "beta: " << hist.beta << "\n";
  os << "max |c|: " << hist.max_abs_c << "\n";
  os << "mass near 0: " << hist.mass_to_zero << ", near infinity: " << hist.mass_to_infinity << "\n";
  os << "accumulation points (log D, mass):\n";
  for (std::size_t i = 0; i < est.log_points.size(); ++i)
    os << "  " << est.log_points[i] << "  " << est.masses[i] << "\n";
  for (const auto& w : hist.warnings) os << "warning: " << w << "\n";
  os << "prediction: " << agreement.summary << "\n";
  for (const auto& m : agreement.mismatches) os << "  " << m << "\n";
  return os.str();
}

}  // namespace kmsf
