#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dynmod/indexing.hpp"
#include "dynmod/structures.hpp"
#include "dynmod/syntax.hpp"

namespace dynmod {

// Variable assignment together with the stage indices its values were drawn
// from: elements[k] lies in stage(context[k]).
struct Valuation {
  std::vector<Element> elements;
  Context context;

  static Valuation empty() { return {}; }
};

// Places each value at the least stage containing it.
Valuation place_valuation(const StagedStructure& s,
                          const std::vector<Element>& elements);

// Picks the index a universal quantifier ranges over. `maxAllowed` is the
// largest index that still leaves room for the quantifiers nested below
// (headroom minus their depth); the default chooser ignores it and returns
// the horizon exactly.
using IndexChooser = std::function<IndexPoint(const Context&, IndexPoint)>;

IndexChooser default_chooser(const LargenessRelation& rel);
IndexChooser random_chooser(const LargenessRelation& rel, std::uint64_t seed);

struct ReflectionResult {
  bool verdict = false;
  std::vector<std::pair<Context, IndexPoint>> trace;  // per quantifier visit
  IndexPoint maxIndexUsed = 0;
  std::set<Context> contextsVisited;
};

// Standard Tarskian truth over the single finite structure M_bound;
// existentials evaluated directly.
bool eval_classical(const StagedStructure& s, const Formula& phi,
                    const std::vector<Element>& valuation, IndexPoint bound);

// Reflection semantics: every universal ranges over one indefinitely large
// stage chosen per context; existentials are rewritten to their
// double-negated universal form first.
ReflectionResult eval_reflection(const StagedStructure& s, const Formula& phi,
                                 const Valuation& v,
                                 const LargenessRelation& rel,
                                 const IndexChooser& chooser,
                                 IndexPoint headroom);
ReflectionResult eval_reflection(const StagedStructure& s, const Formula& phi,
                                 const Valuation& v,
                                 const LargenessRelation& rel,
                                 IndexPoint headroom);

struct WitnessClosureReport {
  HorizonFunction horizon;
  // (canonical universal subformula, context) -> least stable stage
  std::map<std::pair<std::string, Context>, IndexPoint> stableFrom;

  struct ExhaustedCase {
    std::string subformula;
    Context context;
    std::vector<Element> valuation;
  };
  std::vector<ExhaustedCase> exhausted;

  bool closed() const { return exhausted.empty(); }
  LargenessRelation relation() const { return LargenessRelation(horizon); }
};

// Computes, by fixpoint iteration from h == 1, the least horizon such that
// every universal subformula's verdict is constant from h(C) up to the
// scan ceiling for every reachable context and valuation. A case whose
// verdict still rises right at the ceiling cannot be certified and is
// reported as exhausted.
WitnessClosureReport witness_close(const StagedStructure& s,
                                   std::span<const Formula> formulas,
                                   IndexPoint headroom);
WitnessClosureReport witness_close(const StagedStructure& s,
                                   const Formula& phi, IndexPoint headroom);

struct IndependenceReport {
  bool defaultVerdict = false;
  unsigned trials = 0;
  unsigned chooserCalls = 0;  // calls made by the default run
  struct Disagreement {
    unsigned trial;
    bool verdict;
  };
  std::vector<Disagreement> disagreements;

  bool all_agree() const { return disagreements.empty(); }
};

// Re-evaluates under seeded random choosers drawn above the horizon and
// reports any verdict that differs from the default chooser's.
IndependenceReport check_independence(const StagedStructure& s,
                                      const Formula& phi,
                                      const WitnessClosureReport& report,
                                      unsigned trials, std::uint64_t seed,
                                      IndexPoint headroom,
                                      const std::vector<Element>& valuation = {});

// Restricts the k-th quantifier (outermost = 0, counted per nesting level)
// by the k-th predicate: forall y phi becomes forall y (O_k(y) -> phi),
// exists y phi becomes exists y (O_k(y) & phi).
Formula relativize(const Formula& phi,
                   std::span<const std::string> boundPredicates);

struct LocalityReport {
  IndexPoint maxIndexUsed = 0;
  std::set<Context> contexts;

  std::size_t contexts_visited() const { return contexts.size(); }
};

// Evaluates every formula under the reflection semantics and reports the
// largest stage index touched and the distinct contexts visited. Formulas
// with free variables take their values from a prefix of `sharedValuation`.
LocalityReport locality_report(const StagedStructure& s,
                               std::span<const Formula> formulas,
                               const LargenessRelation& rel,
                               IndexPoint headroom,
                               const std::vector<Element>& sharedValuation = {});

}  // namespace dynmod
