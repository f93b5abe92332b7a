#include "kmsf/spectral.hpp"

#include "kmsf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace kmsf {

// --- WeightedAdjacency --------------------------------------------------------

WeightedAdjacency::WeightedAdjacency(Scalar beta, std::vector<std::vector<Entry>> rows,
                                     std::vector<ArrowTerm> arrows)
    : beta_(std::move(beta)), rows_(std::move(rows)), arrows_(std::move(arrows)) {
  for (auto& r : rows_) {
    std::sort(r.begin(), r.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
    std::vector<Entry> merged;
    for (const Entry& e : r) {
      if (e.weight < 0 || !std::isfinite(e.weight)) throw InvalidArgument("adjacency entries must be finite and >= 0");
      if (!merged.empty() && merged.back().col == e.col) {
        merged.back().weight += e.weight;
      } else {
        merged.push_back(e);
      }
    }
    r = std::move(merged);
  }
  const std::size_t n = rows_.size();
  if (n < kDenseBelow) {
    dense_.assign(n * n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      for (const Entry& e : rows_[v]) {
        if (e.col >= n) throw InvalidArgument("adjacency column out of range");
        dense_[v * n + e.col] = e.weight;
      }
    }
  }
}

double WeightedAdjacency::entry(VertexId v, VertexId w) const {
  if (is_dense()) return dense_.at(v * dimension() + w);
  for (const Entry& e : rows_.at(v)) {
    if (e.col == w) return e.weight;
  }
  return 0.0;
}

double WeightedAdjacency::row_sum(VertexId v) const {
  double s = 0.0;
  for (const Entry& e : rows_.at(v)) s += e.weight;
  return s;
}

void WeightedAdjacency::left_multiply(const std::vector<double>& x, std::vector<double>& y) const {
  const std::size_t n = dimension();
  y.assign(n, 0.0);
  if (is_dense()) {
    for (std::size_t v = 0; v < n; ++v) {
      if (x[v] == 0.0) continue;
      const double* row = &dense_[v * n];
      for (std::size_t w = 0; w < n; ++w) y[w] += x[v] * row[w];
    }
    return;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (x[v] == 0.0) continue;
    for (const Entry& e : rows_[v]) y[e.col] += x[v] * e.weight;
  }
}

void WeightedAdjacency::right_multiply(const std::vector<double>& x, std::vector<double>& y) const {
  const std::size_t n = dimension();
  y.assign(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    double s = 0.0;
    for (const Entry& e : rows_[v]) s += e.weight * x[e.col];
    y[v] = s;
  }
}

WeightedAdjacency WeightedAdjacency::restricted(const std::vector<VertexId>& keep) const {
  std::vector<std::size_t> pos(dimension(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < keep.size(); ++i) pos.at(keep[i]) = i;
  std::vector<std::vector<Entry>> rows(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (const Entry& e : rows_[keep[i]]) {
      if (pos[e.col] != static_cast<std::size_t>(-1)) rows[i].push_back({pos[e.col], e.weight});
    }
  }
  std::vector<ArrowTerm> arrows;
  for (const ArrowTerm& a : arrows_) {
    if (pos[a.source] != static_cast<std::size_t>(-1) && pos[a.range] != static_cast<std::size_t>(-1)) {
      arrows.push_back({pos[a.source], pos[a.range], a.potential});
    }
  }
  return WeightedAdjacency(beta_, std::move(rows), std::move(arrows));
}

WeightedAdjacency build_adjacency(const Graph& g, const Scalar& beta) {
  std::vector<std::vector<WeightedAdjacency::Entry>> rows(g.vertex_count());
  std::vector<WeightedAdjacency::ArrowTerm> arrows;
  arrows.reserve(g.arrow_count());
  for (const Arrow& a : g.arrows()) {
    const double w = std::exp(-beta.value() * a.potential.value());
    if (!std::isfinite(w)) {
      throw NumericOverflow("e^{-beta F} overflows on arrow " + a.label + " (" + g.name(a.source) + " -> " +
                            g.name(a.range) + ", F = " + a.potential.str() + ")");
    }
    rows[a.source].push_back({a.range, w});
    arrows.push_back({a.source, a.range, a.potential});
  }
  return WeightedAdjacency(beta, std::move(rows), std::move(arrows));
}

// --- helpers ------------------------------------------------------------------

namespace {

Graph support_graph(const WeightedAdjacency& A) {
  Graph g;
  for (std::size_t v = 0; v < A.dimension(); ++v) g.add_vertex(std::to_string(v));
  for (std::size_t v = 0; v < A.dimension(); ++v) {
    for (const auto& e : A.row(v)) {
      if (e.weight > 0) g.add_arrow(v, e.col, Scalar::rational(0));
    }
  }
  return g;
}

std::vector<char> reachable(const WeightedAdjacency& A, VertexId start, bool forward) {
  const std::size_t n = A.dimension();
  std::vector<std::vector<VertexId>> pred;
  if (!forward) {
    pred.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
      for (const auto& e : A.row(v)) {
        if (e.weight > 0) pred[e.col].push_back(v);
      }
    }
  }
  std::vector<char> seen(n, 0);
  std::vector<VertexId> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    VertexId v = stack.back();
    stack.pop_back();
    auto visit = [&](VertexId w) {
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    };
    if (forward) {
      for (const auto& e : A.row(v)) {
        if (e.weight > 0) visit(e.col);
      }
    } else {
      for (VertexId u : pred[v]) visit(u);
    }
  }
  return seen;
}

bool has_self_loop(const WeightedAdjacency& A, VertexId v) { return A.entry(v, v) > 0; }

bool nontrivial(const WeightedAdjacency& A, const std::vector<VertexId>& comp) {
  return comp.size() > 1 || has_self_loop(A, comp[0]);
}

// Shifted power iteration on an irreducible block.
SpectralEstimate irreducible_radius(const WeightedAdjacency& B, double tol, std::size_t max_iterations) {
  const std::size_t n = B.dimension();
  SpectralEstimate est;
  if (n == 1) {
    est.estimate = est.lower = est.upper = B.entry(0, 0);
    est.converged = true;
    return est;
  }
  double sigma = 0.0;
  for (std::size_t v = 0; v < n; ++v) sigma += B.row_sum(v);
  sigma /= static_cast<double>(n);
  if (sigma <= 0) sigma = 1.0;
  std::vector<double> u(n, 1.0), Bu;
  est.lower = 0.0;
  est.upper = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    B.right_multiply(u, Bu);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = Bu[i] + sigma * u[i];
      const double q = m / u[i];
      lo = std::min(lo, q);
      hi = std::max(hi, q);
      Bu[i] = m;
      norm = std::max(norm, m);
    }
    est.lower = std::max(est.lower, lo - sigma);
    est.upper = std::min(est.upper, hi - sigma);
    est.iterations = it;
    for (std::size_t i = 0; i < n; ++i) u[i] = std::max(Bu[i] / norm, std::numeric_limits<double>::min());
    if (est.upper - est.lower <= tol * std::max(est.upper, 1e-300)) {
      est.converged = true;
      break;
    }
  }
  est.lower = std::max(est.lower, 0.0);
  est.estimate = 0.5 * (est.lower + est.upper);
  return est;
}

// ρ = d e^{-βf} exactly when a block is regular: one exact potential on every
// internal arrow and a common internal out-degree.
std::optional<int> regular_block_sign(const WeightedAdjacency& B) {
  const std::size_t n = B.dimension();
  if (B.arrow_terms().empty()) return std::nullopt;
  const Scalar& f = B.arrow_terms().front().potential;
  if (!f.is_exact()) return std::nullopt;
  std::vector<std::size_t> deg(n, 0);
  for (const auto& a : B.arrow_terms()) {
    if (!a.potential.same_as(f)) return std::nullopt;
    ++deg[a.source];
  }
  if (std::any_of(deg.begin(), deg.end(), [&](std::size_t d) { return d != deg[0]; })) return std::nullopt;
  return exact_log_sign(deg[0], B.beta(), f);
}

struct BlockAnalysis {
  double upper = 0.0;
  double lower = 0.0;
  bool diverges = false;
  bool exact = false;
  std::string why;
};

BlockAnalysis analyse_blocks(const WeightedAdjacency& A, double tol, std::size_t max_iterations) {
  BlockAnalysis out;
  const Graph supp = support_graph(A);
  for (const auto& comp : strongly_connected_components(supp)) {
    if (!nontrivial(A, comp)) continue;
    WeightedAdjacency B = A.restricted(comp);
    SpectralEstimate est = irreducible_radius(B, tol, max_iterations);
    if (auto sign = regular_block_sign(B)) {
      out.exact = true;
      if (*sign >= 0) {
        out.diverges = true;
        out.why = "regular component with d e^{-beta f} >= 1 (exact)";
      }
      if (*sign < 0) est.upper = std::min(est.upper, std::nextafter(1.0, 0.0));
    }
    out.upper = std::max(out.upper, est.upper);
    out.lower = std::max(out.lower, est.lower);
    if (!out.diverges && est.lower >= 1.0) {
      out.diverges = true;
      out.why = "Collatz-Wielandt lower bound " + std::to_string(est.lower) + " >= 1";
    }
  }
  return out;
}

}  // namespace

std::optional<int> exact_log_sign(std::size_t d, const Scalar& beta, const Scalar& f) {
  if (d == 0) return -1;
  Scalar bf = beta * f;
  if (!bf.is_exact()) return std::nullopt;
  LogRational diff = LogRational::log_of(Rational(static_cast<long long>(d))) - *bf.exact();
  return diff.sign();
}

SpectralEstimate spectral_radius(const WeightedAdjacency& A, double tol, std::size_t max_iterations) {
  SpectralEstimate out;
  out.converged = true;
  const Graph supp = support_graph(A);
  for (const auto& comp : strongly_connected_components(supp)) {
    if (!nontrivial(A, comp)) continue;
    SpectralEstimate est = irreducible_radius(A.restricted(comp), tol, max_iterations);
    out.lower = std::max(out.lower, est.lower);
    out.upper = std::max(out.upper, est.upper);
    out.iterations = std::max(out.iterations, est.iterations);
    out.converged = out.converged && est.converged;
    if (est.estimate > out.estimate) out.estimate = est.estimate;
  }
  return out;
}

// --- Green sums ---------------------------------------------------------------

namespace {
constexpr double kGreenCeiling = 1e300;
}

GreenResult green(const WeightedAdjacency& A, VertexId v, VertexId w, double tol, std::size_t n_max) {
  if (!(tol > 0)) throw InvalidArgument("green: tol must be positive");
  if (v >= A.dimension() || w >= A.dimension()) throw InvalidArgument("green: vertex out of range");
  GreenResult res;
  const auto from_v = reachable(A, v, true);
  const auto to_w = reachable(A, w, false);
  std::vector<VertexId> rel;
  for (std::size_t x = 0; x < A.dimension(); ++x) {
    if (from_v[x] && to_w[x]) rel.push_back(x);
  }
  if (rel.empty()) {
    res.converged = true;
    res.tail_bound = 0.0;
    res.certificate = "no path";
    return res;
  }
  const WeightedAdjacency B = A.restricted(rel);
  const std::size_t m = rel.size();
  const std::size_t iv = std::lower_bound(rel.begin(), rel.end(), v) - rel.begin();
  const std::size_t iw = std::lower_bound(rel.begin(), rel.end(), w) - rel.begin();

  std::vector<double> x(m, 0.0), next;
  x[iv] = 1.0;
  res.value = x[iw];

  auto step = [&]() {
    B.left_multiply(x, next);
    x.swap(next);
    ++res.N;
    res.value += x[iw];
  };

  const Graph supp = support_graph(B);
  const auto comps = strongly_connected_components(supp);
  const bool acyclic = std::none_of(comps.begin(), comps.end(), [&](const auto& c) { return nontrivial(B, c); });
  if (acyclic) {
    while (res.N < m && std::any_of(x.begin(), x.end(), [](double d) { return d != 0.0; })) step();
    res.converged = true;
    res.tail_bound = 0.0;
    res.certificate = "nilpotent (acyclic between source and target)";
    return res;
  }

  const BlockAnalysis blocks = analyse_blocks(B, 1e-13, 20'000);
  if (blocks.diverges) {
    const std::size_t budget = std::max<std::size_t>(1, 50'000'000 / std::max<std::size_t>(m, 1));
    while (res.N < std::min(n_max, budget) && res.value < kGreenCeiling) step();
    res.diverged = true;
    res.certificate = blocks.why;
    return res;
  }

  if (blocks.upper < 1.0) {
    // u = Σ_k (B/γ)^k 1 satisfies B u <= γ u up to the truncation term.
    const double gamma = 0.5 * (blocks.upper + 1.0);
    std::vector<double> u(m, 1.0), term(m, 1.0), tmp;
    for (std::size_t k = 0; k < 100'000; ++k) {
      B.right_multiply(term, tmp);
      double mx = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        term[i] = tmp[i] / gamma;
        u[i] += term[i];
        mx = std::max(mx, term[i]);
      }
      if (mx < 1e-17) break;
    }
    B.right_multiply(u, tmp);
    double rho_bar = 0.0;
    for (std::size_t i = 0; i < m; ++i) rho_bar = std::max(rho_bar, tmp[i] / u[i]);
    rho_bar *= 1.0 + 1e-12;
    if (rho_bar < 1.0) {
      auto bound = [&]() {
        double xu = 0.0;
        for (std::size_t i = 0; i < m; ++i) xu += x[i] * u[i];
        return xu * rho_bar / (1.0 - rho_bar) / u[iw];
      };
      double b = bound();
      while (b >= tol * std::max(1.0, res.value) && res.N < n_max) {
        step();
        b = bound();
      }
      res.tail_bound = b;
      res.converged = b < tol * std::max(1.0, res.value);
      res.certificate = "Collatz-Wielandt tail bound, rho <= " + std::to_string(rho_bar);
      return res;
    }
  }

  while (res.N < n_max && res.value < kGreenCeiling) step();
  res.certificate = "none";
  return res;
}

// --- dissipativity ------------------------------------------------------------

std::string_view dissipativity_name(Dissipativity d) {
  switch (d) {
    case Dissipativity::Dissipative:
      return "dissipative";
    case Dissipativity::Conservative:
      return "conservative";
    case Dissipativity::Undecided:
      return "undecided";
  }
  return "?";
}

double cayley_z_spectral_radius(const std::vector<ZGenerator>& gens, double beta) {
  const bool any_pos = std::any_of(gens.begin(), gens.end(), [](const ZGenerator& g) { return g.step > 0; });
  const bool any_neg = std::any_of(gens.begin(), gens.end(), [](const ZGenerator& g) { return g.step < 0; });
  if (!any_pos || !any_neg) return 0.0;
  // log φ(t) with φ(t) = Σ_y e^{-βF(y) + t y}; its derivative is increasing.
  auto slope = [&](double t) {
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& g : gens) mx = std::max(mx, -beta * g.potential.value() + t * g.step);
    double z = 0.0;
    double num = 0.0;
    for (const auto& g : gens) {
      const double e = std::exp(-beta * g.potential.value() + t * g.step - mx);
      z += e;
      num += e * g.step;
    }
    return num / z;
  };
  auto logphi = [&](double t) {
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& g : gens) mx = std::max(mx, -beta * g.potential.value() + t * g.step);
    double z = 0.0;
    for (const auto& g : gens) z += std::exp(-beta * g.potential.value() + t * g.step - mx);
    return mx + std::log(z);
  };
  double lo = -1.0;
  double hi = 1.0;
  while (slope(lo) > 0) lo *= 2;
  while (slope(hi) < 0) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0 ? lo : hi) = mid;
  }
  return std::exp(logphi(0.5 * (lo + hi)));
}

double cayley_free_spectral_radius(const std::vector<FreeGenerator>& gens, double beta) {
  // Nearest-neighbour weights on a free group: ρ = min_{t >= 0} Σ_i √(t² + 4 p_i q_i) - (r-1) t.
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& g : gens) mx = std::max(mx, -beta * g.potential.value());
  std::map<int, std::pair<double, double>> pq;
  for (const auto& g : gens) {
    auto& e = pq[g.letter];
    (g.sign > 0 ? e.first : e.second) += std::exp(-beta * g.potential.value() - mx);
  }
  std::vector<double> c;
  for (const auto& [letter, w] : pq) c.push_back(4.0 * w.first * w.second);
  const double r = static_cast<double>(c.size());
  auto h = [&](double t) {
    double s = 0.0;
    for (double ci : c) s += std::sqrt(t * t + ci);
    return s - (r - 1.0) * t;
  };
  auto dh = [&](double t) {
    double s = 0.0;
    for (double ci : c) s += ci == 0.0 ? 1.0 : t / std::sqrt(t * t + ci);
    return s - (r - 1.0);
  };
  double t_min = 0.0;
  if (dh(0.0) < 0) {
    double hi = 1.0;
    while (dh(hi) < 0) hi *= 2;
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (dh(mid) < 0 ? lo : hi) = mid;
    }
    t_min = 0.5 * (lo + hi);
  }
  return h(t_min) * std::exp(mx);
}

namespace {

// Sign of ln ρ = (ln d - β f2) / 2 for the symmetric presets: the two-element
// set {m, -m} on Z (d = 4, f2 = F(m) + F(-m)) and a full free generating set
// with a single potential f (d = 4(2r-1), f2 = 2f).
std::optional<int> exact_symmetric_sign(const GraphFamily& family, const Scalar& beta) {
  std::size_t d = 0;
  Scalar f2;
  if (family.kind() == FamilyKind::CayleyZ) {
    const auto& g = family.z_generators();
    if (g.size() != 2 || g[0].step != -g[1].step) return std::nullopt;
    d = 4;
    f2 = g[0].potential + g[1].potential;
  } else {
    const auto& g = family.free_generators();
    const std::size_t r = static_cast<std::size_t>(family.free_rank());
    if (g.size() != 2 * r) return std::nullopt;
    for (const auto& x : g) {
      if (!x.potential.same_as(g[0].potential)) return std::nullopt;
    }
    d = 4 * (2 * r - 1);
    f2 = g[0].potential * Scalar::rational(2);
  }
  if (!f2.is_exact()) return std::nullopt;
  return exact_log_sign(d, beta, f2);
}

std::size_t estimated_ball_size(const GraphFamily& f, std::size_t n) {
  if (f.kind() == FamilyKind::CayleyZ) {
    long span = 0;
    for (const auto& g : f.z_generators()) span = std::max(span, std::abs(g.step));
    return 2 * n * static_cast<std::size_t>(span) + 1;
  }
  const double r = f.free_rank();
  const double total = 1.0 + 2.0 * r * (std::pow(2.0 * r - 1.0, static_cast<double>(n)) - 1.0) / (2.0 * r - 2.0);
  return total > 1e15 ? static_cast<std::size_t>(1e15) : static_cast<std::size_t>(total);
}

constexpr std::size_t kCrossCheckCap = 100'000;

}  // namespace

DissipativityReport is_dissipative(const GraphFamily& family, const Scalar& beta, const SpectralOptions& opts) {
  DissipativityReport rep;
  switch (family.kind()) {
    case FamilyKind::Ray:
      rep.verdict = Dissipativity::Dissipative;
      rep.rho = 0.0;
      rep.certificate = "acyclic: every diagonal Green sum equals 1";
      return rep;
    case FamilyKind::Explicit: {
      const WeightedAdjacency A = build_adjacency(family.graph(), beta);
      const BlockAnalysis blocks = analyse_blocks(A, 1e-13, 200'000);
      rep.rho = blocks.upper;
      if (blocks.diverges) {
        rep.verdict = Dissipativity::Conservative;
        rep.certificate = blocks.why;
      } else if (blocks.upper < 1.0) {
        rep.verdict = Dissipativity::Dissipative;
        rep.certificate = "Collatz-Wielandt upper bound " + std::to_string(blocks.upper) + " < 1 on every component";
      } else {
        rep.certificate = "spectral radius bracket straddles 1";
      }
      return rep;
    }
    case FamilyKind::CayleyZ:
    case FamilyKind::CayleyFree:
      break;
  }

  const bool is_z = family.kind() == FamilyKind::CayleyZ;
  const double rho = is_z ? cayley_z_spectral_radius(family.z_generators(), beta.value())
                          : cayley_free_spectral_radius(family.free_generators(), beta.value());
  rep.rho = rho;
  std::optional<int> log_sign = exact_symmetric_sign(family, beta);
  if (!log_sign) {
    if (rho < 1.0 - 1e-12) {
      log_sign = -1;
    } else if (rho > 1.0 + 1e-12) {
      log_sign = 1;
    }
  } else {
    rep.notes.push_back("sign of ln(rho) decided exactly");
  }

  // Finite balls sit inside the Cayley graph, so their spectral radii are
  // lower bounds for the closed form.
  for (std::size_t n : opts.horizons) {
    if (estimated_ball_size(family, n) > std::min(kCrossCheckCap, opts.vertex_cap)) {
      rep.notes.push_back("horizon " + std::to_string(n) + " skipped for the cross-check (too large)");
      continue;
    }
    const Graph h = realize_horizon(family, n, opts.vertex_cap);
    const SpectralEstimate est = spectral_radius(build_adjacency(h, beta), 1e-10, 5'000);
    rep.notes.push_back("horizon " + std::to_string(n) + ": rho >= " + std::to_string(est.lower));
    if (est.lower > rho * (1.0 + 1e-9) + 1e-12) {
      throw Inconsistency("closed-form spectral radius " + std::to_string(rho) + " below horizon lower bound " +
                          std::to_string(est.lower));
    }
  }

  const std::string formula = is_z ? "rho = min_t sum_y e^{-beta F(y) + t y}"
                                   : "rho = min_{t>=0} sum_i sqrt(t^2 + 4 p_i q_i) - (r-1) t";
  if (!log_sign) {
    rep.certificate = formula + " = " + std::to_string(rho) + " is numerically 1";
    return rep;
  }
  if (*log_sign < 0) {
    rep.verdict = Dissipativity::Dissipative;
    rep.certificate = formula + " = " + std::to_string(rho) + " < 1";
  } else if (*log_sign > 0) {
    rep.verdict = Dissipativity::Conservative;
    rep.certificate = formula + " = " + std::to_string(rho) + " > 1";
  } else if (is_z) {
    rep.verdict = Dissipativity::Conservative;
    rep.certificate = "rho = 1 exactly; walks on Z at the spectral radius are recurrent";
  } else {
    rep.verdict = Dissipativity::Dissipative;
    rep.certificate = "rho = 1 exactly; the Green function of a tree stays finite at the spectral radius";
  }
  return rep;
}

}  // namespace kmsf
