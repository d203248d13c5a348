#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dynmod/indexing.hpp"
#include "dynmod/syntax.hpp"

#include "json.hpp"

namespace dynmod {

// Carrier element. Builtin universes use the numeric value itself; explicit
// universes use a dense id in first-appearance order.
using Element = std::int64_t;
using Tuple = std::vector<Element>;
using TupleSet = std::set<Tuple>;

// A directed system of cumulative finite stages. The limit is never
// materialized: `headroom` is the largest stage a run may touch.
class StagedUniverse {
 public:
  enum class Mode { Naturals, Evens, VonNeumann, Explicit };

  static StagedUniverse naturals(IndexPoint headroom);
  static StagedUniverse evens(IndexPoint headroom);
  static StagedUniverse von_neumann(IndexPoint headroom);
  static StagedUniverse builtin(const std::string& name, IndexPoint headroom);
  static StagedUniverse explicit_stages(
      std::vector<std::vector<std::string>> stages, IndexPoint headroom);

  Mode mode() const { return mode_; }
  bool is_builtin() const { return mode_ != Mode::Explicit; }
  IndexPoint headroom() const { return headroom_; }

  // Explicit universes stop growing at the last listed stage; builtins grow
  // up to the headroom.
  bool eventually_constant() const { return mode_ == Mode::Explicit; }
  IndexPoint saturation_stage() const;

  std::vector<Element> stage(IndexPoint i) const;  // throws HeadroomExceeded
  std::size_t stage_size(IndexPoint i) const;
  bool in_stage(Element e, IndexPoint i) const;
  IndexPoint least_stage(Element e) const;

  std::string element_name(Element e) const;
  Element element(const std::string& name) const;
  bool has_element(const std::string& name) const;

 private:
  StagedUniverse() = default;
  IndexPoint clamp_explicit(IndexPoint i) const;

  Mode mode_ = Mode::Naturals;
  IndexPoint headroom_ = 1;
  // Explicit mode: dense ids in first-appearance order; stage i holds the
  // first stageCounts_[i-1] ids.
  std::vector<std::string> names_;
  std::map<std::string, Element> ids_;
  std::vector<std::size_t> stageCounts_;
};

// Interpretation of one relation symbol as a context-indexed family.
class RelationFamily {
 public:
  enum class Mode { LimitRestricted, ExplicitFamily };

  static RelationFamily limit_restricted(unsigned arity, TupleSet tuples);
  static RelationFamily explicit_family(unsigned arity,
                                        std::map<Context, TupleSet> family);

  Mode mode() const { return mode_; }
  unsigned arity() const { return arity_; }
  const TupleSet& limit_tuples() const { return tuples_; }
  const std::map<Context, TupleSet>& family() const { return family_; }

  // R_C: limit tuples intersected with the stage product, or the monotone
  // closure of the listed family entries below C.
  TupleSet at(const StagedUniverse& universe, const Context& c) const;

  // Membership for evaluation. LimitRestricted ignores the context (it
  // coincides with R_C by monotonicity); ExplicitFamily takes the per-argument
  // stage indices.
  bool member(const Context& argStages, const Tuple& t) const;

  // Union of all listed tuples (used where context coherence makes the
  // family context-independent on overlaps).
  TupleSet all_tuples() const;

  // Listed-entry pointwise monotonicity R_C <= R_C'.
  void verify_monotone() const;

  void verify_within(const StagedUniverse& universe,
                     const std::string& name) const;

 private:
  Mode mode_ = Mode::LimitRestricted;
  unsigned arity_ = 1;
  TupleSet tuples_;
  std::map<Context, TupleSet> family_;
};

// A staged first-order structure: universe, relation families, function
// graphs (total on the headroom stage they list), and constants. Immutable
// after load.
class StagedStructure {
 public:
  static StagedStructure load(const nlohmann::json& doc);
  static StagedStructure load_file(const std::string& path);

  const StagedUniverse& universe() const { return universe_; }
  const Signature& signature() const { return signature_; }
  IndexPoint headroom() const { return universe_.headroom(); }

  std::vector<Element> stage_elements(IndexPoint i) const;

  TupleSet relation_at(const std::string& name, const Context& c) const;
  const RelationFamily& relation(const std::string& name) const;

  Element constant(const std::string& name) const;
  Element apply_function(const std::string& name, const Tuple& args) const;

  // Copy with one extra limit-restricted unary relation (used to interpret
  // stage-membership predicates).
  StagedStructure with_unary_relation(const std::string& name,
                                      const std::set<Element>& elements) const;

 private:
  StagedStructure() = default;

  StagedUniverse universe_ = StagedUniverse::naturals(1);
  Signature signature_;
  std::map<std::string, RelationFamily> relations_;
  std::map<std::string, std::map<Tuple, Element>> functions_;
  std::map<std::string, Element> constants_;
};

// Successor-relation fragment across stages, for standard/non-standard
// classification.
struct SystemMap {
  struct Pair {
    IndexPoint fromStage;
    std::string from;
    IndexPoint toStage;
    std::string to;
  };
  std::vector<Pair> pairs;

  static SystemMap load(const nlohmann::json& doc);
};

enum class SystemKind { Standard, NonStandard };

// NonStandard iff two distinct elements of some stage map to one element of
// a later stage. Throws MalformedMap when a pair runs backwards.
SystemKind classify_system(const SystemMap& map);

struct ParadoxReport {
  IndexPoint i = 1;
  IndexPoint j = 1;
  bool subsetHolds = false;     // iff i >= 2j-1
  bool bijectionHolds = false;  // iff i == j
};

// Subset/bijection constraints between the naturals state i and the evens
// state j, verified extensionally against the actual stage sets.
ParadoxReport naturals_evens_constraints(IndexPoint i, IndexPoint j);

}  // namespace dynmod
