#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dynmod/error.hpp"

namespace dynmod {

// Vocabulary of a first-order language. Names must be disjoint across the
// three categories; relation and function arities are at least 1.
struct Signature {
  std::map<std::string, unsigned> relations;
  std::map<std::string, unsigned> functions;
  std::set<std::string> constants;
  bool equality = true;

  void validate() const;
  bool knows_relation(const std::string& name, unsigned arity) const;
};

class Term {
 public:
  enum class Kind { Variable, Constant, Apply };

  Term() : kind_(Kind::Variable), index_(0) {}

  static Term variable(unsigned index);
  static Term constant(std::string name);
  static Term apply(std::string function, std::vector<Term> args);

  Kind kind() const { return kind_; }
  unsigned index() const { return index_; }
  const std::string& name() const { return name_; }
  const std::vector<Term>& args() const { return args_; }

  bool operator==(const Term& other) const;

 private:
  Kind kind_;
  unsigned index_ = 0;
  std::string name_;
  std::vector<Term> args_;
};

// Immutable formula tree with structural sharing. Copies are cheap.
class Formula {
 public:
  enum class Kind {
    Atom,
    Equal,
    Truth,
    Falsity,
    Not,
    And,
    Or,
    Implies,
    ForAll,
    Exists
  };

  static Formula truth();
  static Formula falsity();
  static Formula atom(std::string relation, std::vector<Term> args);
  static Formula equal(Term lhs, Term rhs);
  static Formula negation(Formula operand);
  static Formula conjunction(Formula lhs, Formula rhs);
  static Formula disjunction(Formula lhs, Formula rhs);
  static Formula implication(Formula lhs, Formula rhs);
  static Formula forall(unsigned variable, Formula body);
  static Formula exists(unsigned variable, Formula body);

  Kind kind() const;
  const std::string& relation() const;       // Atom
  const std::vector<Term>& args() const;     // Atom
  const Term& lhs_term() const;              // Equal
  const Term& rhs_term() const;              // Equal
  Formula operand() const;                   // Not
  Formula lhs() const;                       // And/Or/Implies
  Formula rhs() const;                       // And/Or/Implies
  unsigned variable() const;                 // ForAll/Exists
  Formula body() const;                      // ForAll/Exists

  bool operator==(const Formula& other) const;

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// --- parsing and printing ---------------------------------------------------

// Recursive-descent parser for the concrete grammar:
//   formula := "forall" var "." formula | "exists" var "." formula | impl
//   impl    := disj [ "->" impl ]
//   disj    := conj { "|" conj }
//   conj    := neg  { "&" neg }
//   neg     := "~" neg | atom
//   atom    := IDENT "(" term {"," term} ")" | term "=" term
//            | "true" | "false" | "(" formula ")"
//   term    := var | IDENT | IDENT "(" term {"," term} ")"
//   var     := "y" DIGITS
Formula parse_formula(std::string_view text, const Signature& sig);

// Fixed printer; parse(to_canonical(phi)) is structurally equal to phi.
std::string to_canonical(const Formula& phi);

// --- structural queries -----------------------------------------------------

// 1 + the largest free variable index (0 when the formula is a sentence).
unsigned free_variable_bound(const Formula& phi);

// Count of connectives plus quantifiers.
unsigned connective_count(const Formula& phi);

// Maximum quantifier nesting depth.
unsigned quantifier_depth(const Formula& phi);

// All subformulas including phi itself, outermost first.
std::vector<Formula> subformulas(const Formula& phi);

// Least k with phi in L_k: max(n, c+1) for n the free-variable bound and c
// the connective-plus-quantifier count.
unsigned stratum(const Formula& phi);

// Rewrites bound variables so that a quantifier with m variables in scope
// (free prefix plus enclosing quantifiers) binds y_m. `prefix` is the number
// of variable slots the evaluation environment supplies for free variables.
Formula canonicalize(const Formula& phi, unsigned prefix);
Formula canonicalize(const Formula& phi);  // prefix = free_variable_bound

// Rewrites every existential to its double-negated universal form.
Formula eliminate_exists(const Formula& phi);

// All well-formed formulas of L_k up to canonical renaming, for a relational
// signature (constants allowed, function symbols rejected). Guarded to k <= 4.
std::vector<Formula> enumerate_stratum(const Signature& sig, unsigned k);

}  // namespace dynmod
