#pragma once

// Directed multigraphs with arrow potentials, finite paths, and the three
// generator-backed infinite families (ray, Cayley graph of Z, Cayley graph of
// a free group) together with their canonical exhaustions H_1 ⊆ H_2 ⊆ ...

#include "kmsf/exact.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace kmsf {

using VertexId = std::size_t;
using ArrowId = std::size_t;

struct Arrow {
  ArrowId id = 0;
  VertexId source = 0;
  VertexId range = 0;
  Scalar potential;
  std::string label;
};

class Graph {
 public:
  VertexId add_vertex(std::string name);
  ArrowId add_arrow(VertexId source, VertexId range, Scalar potential, std::string label = {});

  std::size_t vertex_count() const noexcept { return names_.size(); }
  std::size_t arrow_count() const noexcept { return arrows_.size(); }
  const std::string& name(VertexId v) const { return names_.at(v); }
  std::optional<VertexId> find(std::string_view name) const;
  VertexId require(std::string_view name) const;

  const Arrow& arrow(ArrowId a) const { return arrows_.at(a); }
  std::span<const Arrow> arrows() const noexcept { return arrows_; }
  std::span<const ArrowId> out_arrows(VertexId v) const { return out_.at(v); }
  std::span<const ArrowId> in_arrows(VertexId v) const { return in_.at(v); }

  /// Vertices matched by name, arrows by (source name, range name, label,
  /// potential).
  bool is_subgraph_of(const Graph& other) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, VertexId> index_;
  std::vector<Arrow> arrows_;
  std::vector<std::vector<ArrowId>> out_;
  std::vector<std::vector<ArrowId>> in_;
};

/// A finite path in a Graph. A length-0 path sits at a vertex.
class FinitePath {
 public:
  static FinitePath at_vertex(const Graph& g, VertexId v);
  /// Throws InvalidArgument unless consecutive arrows compose.
  static FinitePath from_arrows(const Graph& g, std::vector<ArrowId> arrows);

  VertexId source() const noexcept { return source_; }
  VertexId range() const noexcept { return range_; }
  std::size_t length() const noexcept { return arrows_.size(); }
  std::span<const ArrowId> arrows() const noexcept { return arrows_; }
  const Scalar& potential() const noexcept { return potential_; }
  /// Vertices visited, including both endpoints.
  std::vector<VertexId> vertices(const Graph& g) const;

  /// Requires range() == tail.source().
  FinitePath concat(const Graph& g, const FinitePath& tail) const;

 private:
  VertexId source_ = 0;
  VertexId range_ = 0;
  std::vector<ArrowId> arrows_;
  Scalar potential_;
};

Scalar potential_of_path(const FinitePath& p);

// --- ray potentials -------------------------------------------------------------

/// Potentials of the k_n parallel arrows from level n-1 to level n.
using LevelPotentials = std::vector<Scalar>;

/// Closed-form level rule, referenced from files as tail = formula:<name>.
struct LevelFormula {
  std::string name;
  std::string description;
  LevelPotentials (*level)(std::size_t n);
  /// Whether Σ_n (1 - max_j ω_n(j)) converges for the product vectors at
  /// inverse temperature beta; nullopt when unknown.
  std::optional<bool> (*deviation_summable)(double beta);
};

/// Registry of named formulas. Extending the set of ray presets means adding
/// an entry here.
std::span<const LevelFormula> level_formulas();
const LevelFormula* find_level_formula(std::string_view name);

class SequenceSpec {
 public:
  enum class Kind { Constant, Periodic, TabulatedWithTailRule, NamedFormula };
  enum class Tail { Constant, Periodic, Formula };

  SequenceSpec() = default;
  SequenceSpec(std::vector<LevelPotentials> table, Tail tail, const LevelFormula* formula = nullptr);

  Kind kind() const noexcept;
  Tail tail() const noexcept { return tail_; }
  const LevelFormula* formula() const noexcept { return formula_; }
  const std::vector<LevelPotentials>& table() const noexcept { return table_; }

  /// Potentials at level n >= 1.
  LevelPotentials level(std::size_t n) const;
  std::size_t multiplicity(std::size_t n) const { return level(n).size(); }

  /// First level from which the tail rule alone determines everything.
  std::size_t tail_start() const noexcept;
  /// Levels of one tail period (constant: 1, periodic: table size,
  /// formula: 0 meaning non-periodic).
  std::size_t tail_period() const noexcept;

  /// Drop the first `count` levels (the shifted sequence n -> n + count).
  SequenceSpec shifted(std::size_t count) const;

 private:
  std::vector<LevelPotentials> table_;
  Tail tail_ = Tail::Constant;
  const LevelFormula* formula_ = nullptr;
  std::size_t offset_ = 0;  // only used by shifted formula sequences
};

// --- families -------------------------------------------------------------------

enum class FamilyKind { Explicit, Ray, CayleyZ, CayleyFree };

std::string_view family_kind_name(FamilyKind k);

struct ZGenerator {
  long step = 0;
  Scalar potential;
};

/// Free-group generator a, a^-1, b, ... ; letter 0 is 'a'.
struct FreeGenerator {
  int letter = 0;
  int sign = +1;
  Scalar potential;
  std::string label() const;
};

/// Element of a free group as a reduced word; letter i is ±(i+1).
using FreeWord = std::vector<int>;
std::string free_word_name(const FreeWord& w);

class GraphFamily {
 public:
  static GraphFamily explicit_graph(Graph g, bool rationals);
  static GraphFamily ray(SequenceSpec seq, bool rationals);
  static GraphFamily cayley_z(std::vector<ZGenerator> gens, bool rationals);
  static GraphFamily cayley_free(std::vector<FreeGenerator> gens, bool rationals);

  FamilyKind kind() const noexcept { return kind_; }
  bool rationals() const noexcept { return rationals_; }
  bool is_preset() const noexcept { return kind_ != FamilyKind::Explicit; }

  const Graph& graph() const;                        // Explicit
  const SequenceSpec& sequence() const;              // Ray
  const std::vector<ZGenerator>& z_generators() const;
  const std::vector<FreeGenerator>& free_generators() const;
  int free_rank() const;

  /// Every arrow potential (for Ray: the tabulated and first tail levels).
  std::vector<Scalar> sample_potentials(std::size_t ray_levels = 64) const;
  /// All potentials exactly equal to 1.
  bool is_gauge(std::size_t ray_levels = 64) const;

  /// Same family with every potential multiplied by c.
  GraphFamily rescaled(const Scalar& c) const;

 private:
  FamilyKind kind_ = FamilyKind::Explicit;
  bool rationals_ = false;
  std::variant<Graph, SequenceSpec, std::vector<ZGenerator>, std::vector<FreeGenerator>> data_;
};

/// Parse the line-oriented graph description format.
GraphFamily parse_graph(std::string_view text);
GraphFamily load_graph_file(const std::string& path);
/// Canonical text; parse_graph(serialize_graph(f)) reproduces f.
std::string serialize_graph(const GraphFamily& f);
bool same_family(const GraphFamily& a, const GraphFamily& b);

constexpr std::size_t kDefaultVertexCap = 2'000'000;

/// The finite subgraph on H_n: ray levels 0..n, word-metric balls of radius
/// n for Cayley kinds, the whole graph for Explicit. Throws ResourceLimit
/// beyond vertex_cap.
Graph realize_horizon(const GraphFamily& family, std::size_t n,
                      std::size_t vertex_cap = kDefaultVertexCap);

/// Vertex names used by realize_horizon.
std::string ray_vertex_name(std::size_t level);
std::string z_vertex_name(long x);

enum class Simplicity { Simple, NotSimple, Undecided };
std::string_view simplicity_name(Simplicity s);

/// Row-finite criterion for a finite graph: cofinal and every cycle has an
/// exit. Graphs with sinks are outside the criterion and give Undecided.
Simplicity check_simplicity(const Graph& g);
Simplicity check_simplicity(const GraphFamily& f);

bool is_strongly_connected(const Graph& g);

/// Strongly connected components, in reverse topological order (Tarjan).
std::vector<std::vector<VertexId>> strongly_connected_components(const Graph& g);

}  // namespace kmsf
