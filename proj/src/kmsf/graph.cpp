#include "kmsf/graph.hpp"

#include "kmsf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace kmsf {

// --- Graph --------------------------------------------------------------------

VertexId Graph::add_vertex(std::string name) {
  auto [it, inserted] = index_.try_emplace(name, names_.size());
  if (!inserted) throw InvalidArgument("duplicate vertex '" + name + "'");
  names_.push_back(std::move(name));
  out_.emplace_back();
  in_.emplace_back();
  return it->second;
}

ArrowId Graph::add_arrow(VertexId source, VertexId range, Scalar potential, std::string label) {
  if (source >= names_.size() || range >= names_.size()) {
    throw InvalidArgument("arrow endpoint outside the vertex set");
  }
  if (!std::isfinite(potential.value())) throw InvalidArgument("non-finite potential");
  const ArrowId id = arrows_.size();
  if (label.empty()) label = "a" + std::to_string(id);
  arrows_.push_back(Arrow{id, source, range, std::move(potential), std::move(label)});
  out_[source].push_back(id);
  in_[range].push_back(id);
  return id;
}

std::optional<VertexId> Graph::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VertexId Graph::require(std::string_view name) const {
  if (auto v = find(name)) return *v;
  throw InvalidArgument("unknown vertex '" + std::string(name) + "'");
}

bool Graph::is_subgraph_of(const Graph& other) const {
  for (const auto& n : names_) {
    if (!other.find(n)) return false;
  }
  std::multiset<std::tuple<std::string, std::string, std::string, std::string>> theirs;
  for (const Arrow& a : other.arrows_) {
    theirs.emplace(other.name(a.source), other.name(a.range), a.label, a.potential.str());
  }
  for (const Arrow& a : arrows_) {
    auto it = theirs.find({name(a.source), name(a.range), a.label, a.potential.str()});
    if (it == theirs.end()) return false;
    theirs.erase(it);
  }
  return true;
}

// --- FinitePath ---------------------------------------------------------------

FinitePath FinitePath::at_vertex(const Graph& g, VertexId v) {
  if (v >= g.vertex_count()) throw InvalidArgument("path vertex outside graph");
  FinitePath p;
  p.source_ = p.range_ = v;
  p.potential_ = Scalar::rational(0);
  return p;
}

FinitePath FinitePath::from_arrows(const Graph& g, std::vector<ArrowId> arrows) {
  if (arrows.empty()) throw InvalidArgument("from_arrows needs at least one arrow; use at_vertex");
  FinitePath p;
  p.source_ = g.arrow(arrows.front()).source;
  p.potential_ = Scalar::rational(0);
  VertexId at = p.source_;
  for (ArrowId a : arrows) {
    const Arrow& arr = g.arrow(a);
    if (arr.source != at) throw InvalidArgument("arrows do not compose into a path");
    p.potential_ = p.potential_ + arr.potential;
    at = arr.range;
  }
  p.range_ = at;
  p.arrows_ = std::move(arrows);
  return p;
}

std::vector<VertexId> FinitePath::vertices(const Graph& g) const {
  std::vector<VertexId> vs{source_};
  for (ArrowId a : arrows_) vs.push_back(g.arrow(a).range);
  return vs;
}

FinitePath FinitePath::concat(const Graph& g, const FinitePath& tail) const {
  if (range_ != tail.source_) throw InvalidArgument("concat: endpoints do not match");
  if (arrows_.empty()) return tail;
  if (tail.arrows_.empty()) return *this;
  std::vector<ArrowId> all(arrows_);
  all.insert(all.end(), tail.arrows_.begin(), tail.arrows_.end());
  return from_arrows(g, std::move(all));
}

Scalar potential_of_path(const FinitePath& p) { return p.potential(); }

// --- level formulas -----------------------------------------------------------

namespace {

// lambda_k = exp(-2^k) with level potentials (1, 1 - log lambda_k) = (1, 1 + 2^k).
LevelPotentials exp_neg_2k_level(std::size_t n) {
  if (n > 4000) throw InvalidArgument("lambda_exp_neg_2k: level too deep");
  Rational two_k = Rational(boost::multiprecision::pow(BigInt(2), static_cast<unsigned>(n)));
  return {Scalar::rational(1), Scalar::rational(1 + two_k)};
}

// The minority weight at level k is about exp(-|beta| 2^k).
std::optional<bool> exp_neg_2k_summable(double beta) { return beta != 0.0; }

LevelPotentials gauge_pair_level(std::size_t) { return {Scalar::rational(1), Scalar::rational(1)}; }
std::optional<bool> gauge_pair_summable(double) { return false; }

const LevelFormula kFormulas[] = {
    {"lambda_exp_neg_2k", "two arrows per level, potentials 1 and 1+2^k (lambda_k = exp(-2^k))",
     &exp_neg_2k_level, &exp_neg_2k_summable},
    {"gauge_pair", "two arrows per level, both with potential 1", &gauge_pair_level,
     &gauge_pair_summable},
};

}  // namespace

std::span<const LevelFormula> level_formulas() { return kFormulas; }

const LevelFormula* find_level_formula(std::string_view name) {
  for (const auto& f : kFormulas) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

// --- SequenceSpec -------------------------------------------------------------

SequenceSpec::SequenceSpec(std::vector<LevelPotentials> table, Tail tail, const LevelFormula* formula)
    : table_(std::move(table)), tail_(tail), formula_(formula) {
  if (tail_ == Tail::Formula && formula_ == nullptr) throw InvalidArgument("formula tail without formula");
  if (tail_ != Tail::Formula && table_.empty()) throw InvalidArgument("ray needs at least one level");
  for (const auto& lvl : table_) {
    if (lvl.empty()) throw InvalidArgument("every level needs k_n >= 1 arrows");
  }
}

SequenceSpec::Kind SequenceSpec::kind() const noexcept {
  switch (tail_) {
    case Tail::Formula:
      return table_.empty() ? Kind::NamedFormula : Kind::TabulatedWithTailRule;
    case Tail::Periodic:
      return Kind::Periodic;
    case Tail::Constant:
      break;
  }
  return table_.size() == 1 ? Kind::Constant : Kind::TabulatedWithTailRule;
}

LevelPotentials SequenceSpec::level(std::size_t n) const {
  if (n == 0) throw InvalidArgument("levels start at 1");
  switch (tail_) {
    case Tail::Constant:
      return table_[std::min(n, table_.size()) - 1];
    case Tail::Periodic:
      return table_[(n - 1) % table_.size()];
    case Tail::Formula:
      if (n <= table_.size()) return table_[n - 1];
      return formula_->level(n + offset_);
  }
  return {};
}

std::size_t SequenceSpec::tail_start() const noexcept {
  return tail_ == Tail::Periodic ? 1 : table_.size() + (tail_ == Tail::Formula ? 1 : 0);
}

std::size_t SequenceSpec::tail_period() const noexcept {
  switch (tail_) {
    case Tail::Constant:
      return 1;
    case Tail::Periodic:
      return table_.size();
    case Tail::Formula:
      return 0;
  }
  return 0;
}

SequenceSpec SequenceSpec::shifted(std::size_t count) const {
  SequenceSpec out;
  out.tail_ = tail_;
  out.formula_ = formula_;
  switch (tail_) {
    case Tail::Constant:
      for (std::size_t n = count + 1; n <= std::max(table_.size(), count + 1); ++n) out.table_.push_back(level(n));
      break;
    case Tail::Periodic:
      for (std::size_t n = count + 1; n <= count + table_.size(); ++n) out.table_.push_back(level(n));
      break;
    case Tail::Formula:
      for (std::size_t n = count + 1; n <= table_.size(); ++n) out.table_.push_back(level(n));
      out.offset_ = offset_ + count;
      break;
  }
  return out;
}

// --- families -----------------------------------------------------------------

std::string_view family_kind_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::Explicit:
      return "explicit";
    case FamilyKind::Ray:
      return "ray";
    case FamilyKind::CayleyZ:
      return "cayley-z";
    case FamilyKind::CayleyFree:
      return "cayley-free";
  }
  return "?";
}

std::string FreeGenerator::label() const {
  return std::string(1, static_cast<char>('a' + letter)) + (sign > 0 ? "+" : "-");
}

std::string free_word_name(const FreeWord& w) {
  if (w.empty()) return "e";
  std::string s;
  for (int x : w) {
    char c = static_cast<char>('a' + (std::abs(x) - 1));
    s.push_back(x > 0 ? c : static_cast<char>(c - 'a' + 'A'));
  }
  return s;
}

GraphFamily GraphFamily::explicit_graph(Graph g, bool rationals) {
  GraphFamily f;
  f.kind_ = FamilyKind::Explicit;
  f.rationals_ = rationals;
  f.data_ = std::move(g);
  return f;
}

GraphFamily GraphFamily::ray(SequenceSpec seq, bool rationals) {
  GraphFamily f;
  f.kind_ = FamilyKind::Ray;
  f.rationals_ = rationals;
  f.data_ = std::move(seq);
  return f;
}

GraphFamily GraphFamily::cayley_z(std::vector<ZGenerator> gens, bool rationals) {
  if (gens.size() < 2) throw InvalidArgument("Cayley generating set needs at least two elements");
  std::set<long> seen;
  for (const auto& g : gens) {
    if (g.step == 0) throw InvalidArgument("Cayley Z generator must be non-zero");
    if (!seen.insert(g.step).second) throw InvalidArgument("duplicate generator " + std::to_string(g.step));
  }
  GraphFamily f;
  f.kind_ = FamilyKind::CayleyZ;
  f.rationals_ = rationals;
  f.data_ = std::move(gens);
  return f;
}

GraphFamily GraphFamily::cayley_free(std::vector<FreeGenerator> gens, bool rationals) {
  if (gens.size() < 2) throw InvalidArgument("Cayley generating set needs at least two elements");
  std::set<std::pair<int, int>> seen;
  for (const auto& g : gens) {
    if (g.letter < 0 || g.letter >= 26 || (g.sign != 1 && g.sign != -1)) {
      throw InvalidArgument("bad free generator");
    }
    if (!seen.insert({g.letter, g.sign}).second) throw InvalidArgument("duplicate generator " + g.label());
  }
  GraphFamily f;
  f.kind_ = FamilyKind::CayleyFree;
  f.rationals_ = rationals;
  f.data_ = std::move(gens);
  return f;
}

const Graph& GraphFamily::graph() const {
  if (kind_ != FamilyKind::Explicit) throw InvalidArgument("not an explicit graph");
  return std::get<Graph>(data_);
}

const SequenceSpec& GraphFamily::sequence() const {
  if (kind_ != FamilyKind::Ray) throw InvalidArgument("not a ray family");
  return std::get<SequenceSpec>(data_);
}

const std::vector<ZGenerator>& GraphFamily::z_generators() const {
  if (kind_ != FamilyKind::CayleyZ) throw InvalidArgument("not a Cayley Z family");
  return std::get<std::vector<ZGenerator>>(data_);
}

const std::vector<FreeGenerator>& GraphFamily::free_generators() const {
  if (kind_ != FamilyKind::CayleyFree) throw InvalidArgument("not a Cayley free-group family");
  return std::get<std::vector<FreeGenerator>>(data_);
}

int GraphFamily::free_rank() const {
  int r = 0;
  for (const auto& g : free_generators()) r = std::max(r, g.letter + 1);
  return r;
}

std::vector<Scalar> GraphFamily::sample_potentials(std::size_t ray_levels) const {
  std::vector<Scalar> out;
  switch (kind_) {
    case FamilyKind::Explicit:
      for (const auto& a : graph().arrows()) out.push_back(a.potential);
      break;
    case FamilyKind::Ray:
      for (std::size_t n = 1; n <= ray_levels; ++n) {
        for (auto& s : sequence().level(n)) out.push_back(s);
      }
      break;
    case FamilyKind::CayleyZ:
      for (const auto& g : z_generators()) out.push_back(g.potential);
      break;
    case FamilyKind::CayleyFree:
      for (const auto& g : free_generators()) out.push_back(g.potential);
      break;
  }
  return out;
}

bool GraphFamily::is_gauge(std::size_t ray_levels) const {
  const Scalar one = Scalar::rational(1);
  for (const auto& s : sample_potentials(ray_levels)) {
    if (!(s.is_exact() ? s.same_as(one) : s.value() == 1.0)) return false;
  }
  return true;
}

GraphFamily GraphFamily::rescaled(const Scalar& c) const {
  if (c.sign() <= 0) throw InvalidArgument("rescaling factor must be positive");
  switch (kind_) {
    case FamilyKind::Explicit: {
      const Graph& g = graph();
      Graph h;
      for (VertexId v = 0; v < g.vertex_count(); ++v) h.add_vertex(g.name(v));
      for (const auto& a : g.arrows()) h.add_arrow(a.source, a.range, a.potential * c, a.label);
      return explicit_graph(std::move(h), rationals_);
    }
    case FamilyKind::Ray: {
      const SequenceSpec& s = sequence();
      if (s.tail() == SequenceSpec::Tail::Formula) {
        throw InvalidArgument("rescaling a formula-tailed ray is not supported");
      }
      std::vector<LevelPotentials> table;
      for (const auto& lvl : s.table()) {
        LevelPotentials l;
        for (const auto& x : lvl) l.push_back(x * c);
        table.push_back(std::move(l));
      }
      return ray(SequenceSpec(std::move(table), s.tail()), rationals_);
    }
    case FamilyKind::CayleyZ: {
      auto gens = z_generators();
      for (auto& g : gens) g.potential = g.potential * c;
      return cayley_z(std::move(gens), rationals_);
    }
    case FamilyKind::CayleyFree: {
      auto gens = free_generators();
      for (auto& g : gens) g.potential = g.potential * c;
      return cayley_free(std::move(gens), rationals_);
    }
  }
  return *this;
}

// --- parsing ------------------------------------------------------------------

namespace {

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

Scalar parse_value(const std::string& tok, int line, bool rationals) {
  Scalar v;
  try {
    if (!tok.empty() && tok[0] == '~') {
      v = Scalar(parse_scalar(tok.substr(1)).value());
    } else {
      v = parse_scalar(tok);
    }
  } catch (const ParseError& e) {
    throw ParseError(line, e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(line, e.what());
  }
  if (!std::isfinite(v.value())) throw ParseError(line, "non-finite potential '" + tok + "'");
  if (rationals && !v.is_exact()) {
    throw ParseError(line, "value '" + tok + "' has no exact form but rationals = true");
  }
  return v;
}

struct RawDoc {
  std::optional<FamilyKind> kind;
  bool rationals = false;
  int kind_line = 0;
  std::vector<std::pair<int, std::vector<std::string>>> body;  // line, tokens
  std::optional<std::pair<int, std::string>> tail;
};

}  // namespace

GraphFamily parse_graph(std::string_view text) {
  RawDoc doc;
  bool in_graph = false;
  int lineno = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line != "[graph]") throw ParseError(lineno, "unknown section " + line);
      if (in_graph) throw ParseError(lineno, "duplicate [graph] section");
      in_graph = true;
      continue;
    }
    if (!in_graph) throw ParseError(lineno, "content before [graph] header");
    if (auto eq = line.find('='); eq != std::string::npos) {
      std::string key = trim(line.substr(0, eq));
      std::string val = trim(line.substr(eq + 1));
      if (key == "kind") {
        if (val == "explicit") {
          doc.kind = FamilyKind::Explicit;
        } else if (val == "ray") {
          doc.kind = FamilyKind::Ray;
        } else if (val == "cayley-z") {
          doc.kind = FamilyKind::CayleyZ;
        } else if (val == "cayley-free") {
          doc.kind = FamilyKind::CayleyFree;
        } else {
          throw ParseError(lineno, "unknown kind '" + val + "'");
        }
        doc.kind_line = lineno;
      } else if (key == "rationals") {
        if (val != "true" && val != "false") throw ParseError(lineno, "rationals must be true or false");
        doc.rationals = val == "true";
      } else if (key == "tail") {
        doc.tail = {lineno, val};
      } else {
        throw ParseError(lineno, "unknown key '" + key + "'");
      }
      continue;
    }
    doc.body.emplace_back(lineno, split_ws(line));
  }
  if (!in_graph) throw ParseError(0, "missing [graph] header");
  if (!doc.kind) throw ParseError(0, "missing 'kind = ...'");

  auto reject_directive = [&](const std::string& d, int line) {
    throw ParseError(line, "'" + d + "' not valid for kind " + std::string(family_kind_name(*doc.kind)));
  };
  if (doc.tail && *doc.kind != FamilyKind::Ray) reject_directive("tail", doc.tail->first);

  switch (*doc.kind) {
    case FamilyKind::Explicit: {
      Graph g;
      std::vector<std::tuple<int, std::string, std::string, Scalar>> arrows;
      for (auto& [line, toks] : doc.body) {
        if (toks[0] == "vertex") {
          if (toks.size() != 2) throw ParseError(line, "expected: vertex <id>");
          try {
            g.add_vertex(toks[1]);
          } catch (const InvalidArgument& e) {
            throw ParseError(line, e.what());
          }
        } else if (toks[0] == "arrow") {
          if (toks.size() != 4) throw ParseError(line, "expected: arrow <src> <dst> <F-value>");
          arrows.emplace_back(line, toks[1], toks[2], parse_value(toks[3], line, doc.rationals));
        } else {
          reject_directive(toks[0], line);
        }
      }
      for (auto& [line, s, d, F] : arrows) {
        auto sv = g.find(s);
        auto dv = g.find(d);
        if (!sv) throw ParseError(line, "dangling vertex reference '" + s + "'");
        if (!dv) throw ParseError(line, "dangling vertex reference '" + d + "'");
        g.add_arrow(*sv, *dv, F);
      }
      if (g.vertex_count() == 0) throw ParseError(0, "explicit graph has no vertices");
      for (VertexId v = 0; v < g.vertex_count(); ++v) {
        if (g.out_arrows(v).empty()) {
          throw ParseError(0, "vertex '" + g.name(v) + "' is a sink; sinks are not supported");
        }
      }
      return GraphFamily::explicit_graph(std::move(g), doc.rationals);
    }
    case FamilyKind::Ray: {
      std::map<std::size_t, std::pair<int, LevelPotentials>> levels;
      for (auto& [line, toks] : doc.body) {
        if (toks[0] != "level") reject_directive(toks[0], line);
        if (toks.size() < 3) throw ParseError(line, "expected: level <n> <F-value>...");
        std::size_t n = 0;
        try {
          n = std::stoul(toks[1]);
        } catch (...) {
          throw ParseError(line, "bad level index '" + toks[1] + "'");
        }
        if (n == 0) throw ParseError(line, "levels start at 1");
        LevelPotentials pots;
        for (std::size_t i = 2; i < toks.size(); ++i) pots.push_back(parse_value(toks[i], line, doc.rationals));
        if (!levels.emplace(n, std::make_pair(line, std::move(pots))).second) {
          throw ParseError(line, "duplicate level " + toks[1]);
        }
      }
      std::vector<LevelPotentials> table;
      for (auto& [n, entry] : levels) {
        if (n != table.size() + 1) throw ParseError(entry.first, "levels must be consecutive from 1");
        table.push_back(std::move(entry.second));
      }
      SequenceSpec::Tail tail = SequenceSpec::Tail::Constant;
      const LevelFormula* formula = nullptr;
      if (doc.tail) {
        const std::string& t = doc.tail->second;
        if (t == "constant") {
          tail = SequenceSpec::Tail::Constant;
        } else if (t == "periodic") {
          tail = SequenceSpec::Tail::Periodic;
        } else if (t.rfind("formula:", 0) == 0) {
          formula = find_level_formula(t.substr(8));
          if (!formula) throw ParseError(doc.tail->first, "unknown formula '" + t.substr(8) + "'");
          tail = SequenceSpec::Tail::Formula;
        } else {
          throw ParseError(doc.tail->first, "unknown tail rule '" + t + "'");
        }
      }
      if (table.empty() && tail != SequenceSpec::Tail::Formula) throw ParseError(0, "ray needs at least one level");
      return GraphFamily::ray(SequenceSpec(std::move(table), tail, formula), doc.rationals);
    }
    case FamilyKind::CayleyZ: {
      std::vector<ZGenerator> gens;
      for (auto& [line, toks] : doc.body) {
        if (toks[0] != "gen") reject_directive(toks[0], line);
        if (toks.size() != 3) throw ParseError(line, "expected: gen <label> <F-value>");
        long step = 0;
        try {
          std::size_t used = 0;
          step = std::stol(toks[1], &used);
          if (used != toks[1].size()) throw std::invalid_argument("trailing");
        } catch (...) {
          throw ParseError(line, "Cayley Z generator label must be a non-zero integer, got '" + toks[1] + "'");
        }
        if (step == 0) throw ParseError(line, "Cayley Z generator label must be non-zero");
        gens.push_back({step, parse_value(toks[2], line, doc.rationals)});
      }
      if (gens.size() < 2) throw ParseError(doc.kind_line, "Cayley generating set needs |Y| >= 2");
      try {
        return GraphFamily::cayley_z(std::move(gens), doc.rationals);
      } catch (const InvalidArgument& e) {
        throw ParseError(doc.kind_line, e.what());
      }
    }
    case FamilyKind::CayleyFree: {
      std::vector<FreeGenerator> gens;
      for (auto& [line, toks] : doc.body) {
        if (toks[0] != "gen") reject_directive(toks[0], line);
        if (toks.size() != 3) throw ParseError(line, "expected: gen <label> <F-value>");
        const std::string& lab = toks[1];
        if (lab.size() != 2 || lab[0] < 'a' || lab[0] > 'z' || (lab[1] != '+' && lab[1] != '-')) {
          throw ParseError(line, "free generator label must look like a+ or b-, got '" + lab + "'");
        }
        gens.push_back({lab[0] - 'a', lab[1] == '+' ? 1 : -1, parse_value(toks[2], line, doc.rationals)});
      }
      if (gens.size() < 2) throw ParseError(doc.kind_line, "Cayley generating set needs |Y| >= 2");
      try {
        return GraphFamily::cayley_free(std::move(gens), doc.rationals);
      } catch (const InvalidArgument& e) {
        throw ParseError(doc.kind_line, e.what());
      }
    }
  }
  throw ParseError(0, "unreachable");
}

GraphFamily load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read graph file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_graph(ss.str());
}

namespace {

std::string value_text(const Scalar& s) { return s.is_exact() ? s.str() : "~" + s.str(); }

}  // namespace

std::string serialize_graph(const GraphFamily& f) {
  std::ostringstream out;
  out << "[graph]\n";
  out << "kind = " << family_kind_name(f.kind()) << "\n";
  out << "rationals = " << (f.rationals() ? "true" : "false") << "\n";
  switch (f.kind()) {
    case FamilyKind::Explicit: {
      const Graph& g = f.graph();
      for (VertexId v = 0; v < g.vertex_count(); ++v) out << "vertex " << g.name(v) << "\n";
      for (const auto& a : g.arrows()) {
        out << "arrow " << g.name(a.source) << " " << g.name(a.range) << " " << value_text(a.potential) << "\n";
      }
      break;
    }
    case FamilyKind::Ray: {
      const SequenceSpec& s = f.sequence();
      for (std::size_t n = 1; n <= s.table().size(); ++n) {
        out << "level " << n;
        for (const auto& x : s.table()[n - 1]) out << " " << value_text(x);
        out << "\n";
      }
      switch (s.tail()) {
        case SequenceSpec::Tail::Constant:
          out << "tail = constant\n";
          break;
        case SequenceSpec::Tail::Periodic:
          out << "tail = periodic\n";
          break;
        case SequenceSpec::Tail::Formula:
          out << "tail = formula:" << s.formula()->name << "\n";
          break;
      }
      break;
    }
    case FamilyKind::CayleyZ:
      for (const auto& g : f.z_generators()) out << "gen " << g.step << " " << value_text(g.potential) << "\n";
      break;
    case FamilyKind::CayleyFree:
      for (const auto& g : f.free_generators()) out << "gen " << g.label() << " " << value_text(g.potential) << "\n";
      break;
  }
  return out.str();
}

bool same_family(const GraphFamily& a, const GraphFamily& b) {
  if (a.kind() != b.kind() || a.rationals() != b.rationals()) return false;
  auto same_list = [](const std::vector<Scalar>& x, const std::vector<Scalar>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!x[i].same_as(y[i])) return false;
    }
    return true;
  };
  switch (a.kind()) {
    case FamilyKind::Explicit: {
      const Graph& g = a.graph();
      const Graph& h = b.graph();
      if (g.vertex_count() != h.vertex_count() || g.arrow_count() != h.arrow_count()) return false;
      for (VertexId v = 0; v < g.vertex_count(); ++v) {
        if (g.name(v) != h.name(v)) return false;
      }
      for (std::size_t i = 0; i < g.arrow_count(); ++i) {
        const Arrow& x = g.arrows()[i];
        const Arrow& y = h.arrows()[i];
        if (x.source != y.source || x.range != y.range || !x.potential.same_as(y.potential)) return false;
      }
      return true;
    }
    case FamilyKind::Ray: {
      const SequenceSpec& s = a.sequence();
      const SequenceSpec& t = b.sequence();
      if (s.tail() != t.tail() || s.formula() != t.formula() || s.table().size() != t.table().size()) return false;
      for (std::size_t i = 0; i < s.table().size(); ++i) {
        if (!same_list(s.table()[i], t.table()[i])) return false;
      }
      return true;
    }
    case FamilyKind::CayleyZ: {
      const auto& x = a.z_generators();
      const auto& y = b.z_generators();
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].step != y[i].step || !x[i].potential.same_as(y[i].potential)) return false;
      }
      return true;
    }
    case FamilyKind::CayleyFree: {
      const auto& x = a.free_generators();
      const auto& y = b.free_generators();
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].letter != y[i].letter || x[i].sign != y[i].sign || !x[i].potential.same_as(y[i].potential)) {
          return false;
        }
      }
      return true;
    }
  }
  return false;
}

// --- horizons -----------------------------------------------------------------

std::string ray_vertex_name(std::size_t level) { return "v" + std::to_string(level); }
std::string z_vertex_name(long x) { return std::to_string(x); }

namespace {

FreeWord free_multiply(const FreeWord& w, int letter) {
  FreeWord out = w;
  if (!out.empty() && out.back() == -letter) {
    out.pop_back();
  } else {
    out.push_back(letter);
  }
  return out;
}

}  // namespace

Graph realize_horizon(const GraphFamily& family, std::size_t n, std::size_t vertex_cap) {
  if (n == 0) throw InvalidArgument("horizon index must be >= 1");
  Graph g;
  auto guard = [&](std::size_t count) {
    if (count > vertex_cap) {
      throw ResourceLimit("horizon " + std::to_string(n) + " exceeds the vertex cap of " +
                          std::to_string(vertex_cap));
    }
  };
  switch (family.kind()) {
    case FamilyKind::Explicit:
      return family.graph();
    case FamilyKind::Ray: {
      guard(n + 1);
      for (std::size_t k = 0; k <= n; ++k) g.add_vertex(ray_vertex_name(k));
      for (std::size_t k = 1; k <= n; ++k) {
        LevelPotentials lvl = family.sequence().level(k);
        for (std::size_t j = 0; j < lvl.size(); ++j) {
          g.add_arrow(k - 1, k, lvl[j], "L" + std::to_string(k) + "." + std::to_string(j + 1));
        }
      }
      return g;
    }
    case FamilyKind::CayleyZ: {
      const auto& gens = family.z_generators();
      std::map<long, std::size_t> dist{{0, 0}};
      std::deque<long> queue{0};
      std::vector<long> order;
      while (!queue.empty()) {
        long x = queue.front();
        queue.pop_front();
        order.push_back(x);
        guard(order.size());
        if (dist[x] == n) continue;
        for (const auto& y : gens) {
          for (long step : {y.step, -y.step}) {
            if (dist.emplace(x + step, dist[x] + 1).second) queue.push_back(x + step);
          }
        }
      }
      for (long x : order) g.add_vertex(z_vertex_name(x));
      for (std::size_t i = 0; i < order.size(); ++i) {
        for (const auto& y : gens) {
          if (auto target = g.find(z_vertex_name(order[i] + y.step))) {
            g.add_arrow(i, *target, y.potential, std::to_string(y.step));
          }
        }
      }
      return g;
    }
    case FamilyKind::CayleyFree: {
      const auto& gens = family.free_generators();
      std::set<int> letters;
      for (const auto& y : gens) {
        letters.insert(y.letter + 1);
        letters.insert(-(y.letter + 1));
      }
      std::vector<FreeWord> order{FreeWord{}};
      for (std::size_t head = 0; head < order.size(); ++head) {
        guard(order.size());
        const FreeWord w = order[head];
        if (w.size() == n) continue;
        for (int l : letters) {
          if (!w.empty() && w.back() == -l) continue;
          FreeWord next = w;
          next.push_back(l);
          order.push_back(std::move(next));
        }
      }
      for (const auto& w : order) g.add_vertex(free_word_name(w));
      for (std::size_t i = 0; i < order.size(); ++i) {
        for (const auto& y : gens) {
          FreeWord t = free_multiply(order[i], y.sign * (y.letter + 1));
          if (auto target = g.find(free_word_name(t))) g.add_arrow(i, *target, y.potential, y.label());
        }
      }
      return g;
    }
  }
  return g;
}

// --- connectivity and simplicity ----------------------------------------------

std::string_view simplicity_name(Simplicity s) {
  switch (s) {
    case Simplicity::Simple:
      return "simple";
    case Simplicity::NotSimple:
      return "not-simple";
    case Simplicity::Undecided:
      return "undecided";
  }
  return "?";
}

namespace {

std::vector<char> reach(const Graph& g, const std::vector<VertexId>& start, bool forward) {
  std::vector<char> seen(g.vertex_count(), 0);
  std::vector<VertexId> stack;
  for (VertexId v : start) {
    if (!seen[v]) {
      seen[v] = 1;
      stack.push_back(v);
    }
  }
  while (!stack.empty()) {
    VertexId v = stack.back();
    stack.pop_back();
    auto arrows = forward ? g.out_arrows(v) : g.in_arrows(v);
    for (ArrowId a : arrows) {
      VertexId w = forward ? g.arrow(a).range : g.arrow(a).source;
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace

std::vector<std::vector<VertexId>> strongly_connected_components(const Graph& g) {
  // iterative Tarjan
  const std::size_t n = g.vertex_count();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<VertexId> stack;
  std::vector<std::vector<VertexId>> comps;
  std::size_t counter = 0;
  struct Frame {
    VertexId v;
    std::size_t next;
  };
  for (VertexId root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      auto outs = g.out_arrows(f.v);
      if (f.next < outs.size()) {
        VertexId w = g.arrow(outs[f.next++]).range;
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      VertexId v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<VertexId> comp;
        VertexId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
    }
  }
  return comps;
}

bool is_strongly_connected(const Graph& g) {
  if (g.vertex_count() == 0) return false;
  auto fwd = reach(g, {0}, true);
  auto bwd = reach(g, {0}, false);
  return std::all_of(fwd.begin(), fwd.end(), [](char c) { return c; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](char c) { return c; });
}

Simplicity check_simplicity(const Graph& g) {
  if (g.vertex_count() == 0) return Simplicity::Undecided;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (g.out_arrows(v).empty()) return Simplicity::Undecided;
  }
  auto comps = strongly_connected_components(g);
  for (const auto& comp : comps) {
    bool nontrivial = comp.size() > 1;
    if (!nontrivial) {
      for (ArrowId a : g.out_arrows(comp[0])) nontrivial |= g.arrow(a).range == comp[0];
    }
    if (!nontrivial) continue;
    // a cycle has no exit iff each of its vertices emits exactly one arrow,
    // and then the cycle is the whole component
    bool exitless = std::all_of(comp.begin(), comp.end(), [&](VertexId v) { return g.out_arrows(v).size() == 1; });
    if (exitless) return Simplicity::NotSimple;
    auto reaching = reach(g, comp, false);
    if (!std::all_of(reaching.begin(), reaching.end(), [](char c) { return c; })) return Simplicity::NotSimple;
  }
  return Simplicity::Simple;
}

Simplicity check_simplicity(const GraphFamily& f) {
  switch (f.kind()) {
    case FamilyKind::Explicit:
      return check_simplicity(f.graph());
    case FamilyKind::Ray:
      // acyclic, and every vertex reaches every later level
      return Simplicity::Simple;
    case FamilyKind::CayleyZ:
      return f.z_generators().size() >= 2 ? Simplicity::Simple : Simplicity::Undecided;
    case FamilyKind::CayleyFree:
      return f.free_generators().size() >= 2 ? Simplicity::Simple : Simplicity::Undecided;
  }
  return Simplicity::Undecided;
}

}  // namespace kmsf
