#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dynmod/semantics.hpp"
#include "dynmod/structures.hpp"

#include "json.hpp"

namespace dynmod {

// Staged Kripke model: a preorder of epistemic nodes, a staged structure per
// node (universes may grow along the order), and node-indexed relation
// states. Two laws govern the states: node persistence (R^k_C contained in
// R^k'_C for k <= k') and context coherence at a node (agreement on the
// overlap M_C and M_C' of two contexts).
class KripkeStagedModel {
 public:
  // Verifies both laws and universe monotonicity; throws on violations.
  static KripkeStagedModel load(const nlohmann::json& doc);
  static KripkeStagedModel load_file(const std::string& path);
  // Schema checks only; the law checkers below run on the result.
  static KripkeStagedModel load_unchecked(const nlohmann::json& doc);

  const std::vector<std::string>& nodes() const { return nodes_; }
  std::size_t node_id(const std::string& name) const;
  bool leq(std::size_t a, std::size_t b) const { return leq_[a][b]; }
  const StagedStructure& structure(std::size_t node) const {
    return structures_[node];
  }
  IndexPoint headroom() const { return headroom_; }
  const std::vector<std::string>& relation_names() const {
    return relationNames_;
  }
  unsigned relation_arity(const std::string& name) const;

  // Relation state at a node, as declared: the relationStates entry when
  // present, otherwise the node structure's own interpretation.
  const RelationFamily& state(const std::string& relation,
                              std::size_t node) const;

  // Total membership after coherence: a tuple holds iff it appears in some
  // listed entry of the state.
  bool holds(const std::string& relation, std::size_t node,
             const Tuple& tuple) const;

 private:
  KripkeStagedModel() = default;

  std::vector<std::string> nodes_;
  std::map<std::string, std::size_t> nodeIndex_;
  std::vector<std::vector<bool>> leq_;
  std::vector<StagedStructure> structures_;
  std::vector<std::string> relationNames_;
  std::map<std::string, unsigned> arities_;
  // relation -> node -> family; only for relationStates entries
  std::map<std::string, std::map<std::size_t, RelationFamily>> states_;
  IndexPoint headroom_ = 1;
};

struct KripkeLawReport {
  struct Violation {
    std::string relation;
    std::string nodeA;
    std::string nodeB;            // persistence: the later node; else empty
    Context contextA;
    Context contextB;             // coherence: the second context
    std::vector<std::string> tuple;
  };
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

KripkeLawReport check_persistence(const KripkeStagedModel& model);
KripkeLawReport check_context_coherence(const KripkeStagedModel& model);

// Intuitionistic forcing with the reflection-bounded universal: quantifier
// stages come from the horizon of the current context. Valuations carry
// element names so values transfer between node universes.
bool force(const KripkeStagedModel& model, const std::string& node,
           const Formula& phi, const std::vector<std::string>& valuation,
           const LargenessRelation& rel, IndexPoint headroom);

// Oracle: standard Kripke forcing with quantifiers over the node domains at
// a fixed bound.
bool force_textbook(const KripkeStagedModel& model, const std::string& node,
                    const Formula& phi,
                    const std::vector<std::string>& valuation,
                    IndexPoint bound);

// Witness closure over the product of nodes and contexts; stabilizes both
// universal and existential stage choices (existentials are native here).
WitnessClosureReport kripke_witness_close(const KripkeStagedModel& model,
                                          std::span<const Formula> formulas,
                                          IndexPoint headroom);

}  // namespace dynmod
