#include "dynmod/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>
#include <sstream>

namespace dynmod {

// --- Signature ---------------------------------------------------------------

void Signature::validate() const {
  for (const auto& [name, arity] : relations) {
    if (arity < 1)
      throw Error(ErrorKind::Signature, "relation " + name + " has arity 0");
    if (functions.count(name) || constants.count(name))
      throw Error(ErrorKind::Signature, "symbol " + name + " is not unique");
  }
  for (const auto& [name, arity] : functions) {
    if (arity < 1)
      throw Error(ErrorKind::Signature, "function " + name + " has arity 0");
    if (constants.count(name))
      throw Error(ErrorKind::Signature, "symbol " + name + " is not unique");
  }
}

bool Signature::knows_relation(const std::string& name, unsigned arity) const {
  auto it = relations.find(name);
  return it != relations.end() && it->second == arity;
}

// --- Term ---------------------------------------------------------------------

Term Term::variable(unsigned index) {
  Term t;
  t.kind_ = Kind::Variable;
  t.index_ = index;
  return t;
}

Term Term::constant(std::string name) {
  Term t;
  t.kind_ = Kind::Constant;
  t.name_ = std::move(name);
  return t;
}

Term Term::apply(std::string function, std::vector<Term> args) {
  Term t;
  t.kind_ = Kind::Apply;
  t.name_ = std::move(function);
  t.args_ = std::move(args);
  return t;
}

bool Term::operator==(const Term& other) const {
  if (kind_ != other.kind_) return false;
  switch (kind_) {
    case Kind::Variable: return index_ == other.index_;
    case Kind::Constant: return name_ == other.name_;
    case Kind::Apply: return name_ == other.name_ && args_ == other.args_;
  }
  return false;
}

// --- Formula node -------------------------------------------------------------

struct Formula::Node {
  Kind kind;
  std::string relation;
  std::vector<Term> args;
  Term termLhs, termRhs;
  unsigned variable = 0;
  std::shared_ptr<const Node> a, b;
};

Formula Formula::truth() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Truth;
  return Formula(std::move(n));
}

Formula Formula::falsity() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Falsity;
  return Formula(std::move(n));
}

Formula Formula::atom(std::string relation, std::vector<Term> args) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Atom;
  n->relation = std::move(relation);
  n->args = std::move(args);
  return Formula(std::move(n));
}

Formula Formula::equal(Term lhs, Term rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Equal;
  n->termLhs = std::move(lhs);
  n->termRhs = std::move(rhs);
  return Formula(std::move(n));
}

Formula Formula::negation(Formula operand) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Not;
  n->a = operand.node_;
  return Formula(std::move(n));
}

Formula Formula::conjunction(Formula lhs, Formula rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::And;
  n->a = lhs.node_;
  n->b = rhs.node_;
  return Formula(std::move(n));
}

Formula Formula::disjunction(Formula lhs, Formula rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Or;
  n->a = lhs.node_;
  n->b = rhs.node_;
  return Formula(std::move(n));
}

Formula Formula::implication(Formula lhs, Formula rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Implies;
  n->a = lhs.node_;
  n->b = rhs.node_;
  return Formula(std::move(n));
}

Formula Formula::forall(unsigned variable, Formula body) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::ForAll;
  n->variable = variable;
  n->a = body.node_;
  return Formula(std::move(n));
}

Formula Formula::exists(unsigned variable, Formula body) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Exists;
  n->variable = variable;
  n->a = body.node_;
  return Formula(std::move(n));
}

Formula::Kind Formula::kind() const { return node_->kind; }
const std::string& Formula::relation() const { return node_->relation; }
const std::vector<Term>& Formula::args() const { return node_->args; }
const Term& Formula::lhs_term() const { return node_->termLhs; }
const Term& Formula::rhs_term() const { return node_->termRhs; }
Formula Formula::operand() const { return Formula(node_->a); }
Formula Formula::lhs() const { return Formula(node_->a); }
Formula Formula::rhs() const { return Formula(node_->b); }
unsigned Formula::variable() const { return node_->variable; }
Formula Formula::body() const { return Formula(node_->a); }

bool Formula::operator==(const Formula& other) const {
  if (node_ == other.node_) return true;
  if (node_->kind != other.node_->kind) return false;
  switch (node_->kind) {
    case Kind::Truth:
    case Kind::Falsity:
      return true;
    case Kind::Atom:
      return node_->relation == other.node_->relation &&
             node_->args == other.node_->args;
    case Kind::Equal:
      return node_->termLhs == other.node_->termLhs &&
             node_->termRhs == other.node_->termRhs;
    case Kind::Not:
      return Formula(node_->a) == Formula(other.node_->a);
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
      return Formula(node_->a) == Formula(other.node_->a) &&
             Formula(node_->b) == Formula(other.node_->b);
    case Kind::ForAll:
    case Kind::Exists:
      return node_->variable == other.node_->variable &&
             Formula(node_->a) == Formula(other.node_->a);
  }
  return false;
}

namespace {

// --- lexer --------------------------------------------------------------------

enum class Tok {
  End,
  LParen,
  RParen,
  Comma,
  Dot,
  Eq,
  Tilde,
  Amp,
  Pipe,
  Arrow,
  Ident,
  Var,
  Forall,
  Exists,
  True,
  False
};

struct Token {
  Tok kind;
  std::string text;
  unsigned varIndex = 0;
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    current_.pos = pos_;
    if (pos_ >= text_.size()) {
      current_.kind = Tok::End;
      current_.text.clear();
      return;
    }
    char c = text_[pos_];
    switch (c) {
      case '(': current_ = {Tok::LParen, "(", 0, pos_++}; return;
      case ')': current_ = {Tok::RParen, ")", 0, pos_++}; return;
      case ',': current_ = {Tok::Comma, ",", 0, pos_++}; return;
      case '.': current_ = {Tok::Dot, ".", 0, pos_++}; return;
      case '=': current_ = {Tok::Eq, "=", 0, pos_++}; return;
      case '~': current_ = {Tok::Tilde, "~", 0, pos_++}; return;
      case '&': current_ = {Tok::Amp, "&", 0, pos_++}; return;
      case '|': current_ = {Tok::Pipe, "|", 0, pos_++}; return;
      case '-':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
          current_ = {Tok::Arrow, "->", 0, pos_};
          pos_ += 2;
          return;
        }
        throw Error(ErrorKind::Parse, "expected '->'", pos_);
      default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_'))
        ++pos_;
      std::string word(text_.substr(start, pos_ - start));
      if (word == "forall") {
        current_ = {Tok::Forall, word, 0, start};
      } else if (word == "exists") {
        current_ = {Tok::Exists, word, 0, start};
      } else if (word == "true") {
        current_ = {Tok::True, word, 0, start};
      } else if (word == "false") {
        current_ = {Tok::False, word, 0, start};
      } else if (word.size() > 1 && word[0] == 'y' &&
                 std::all_of(word.begin() + 1, word.end(), [](char d) {
                   return std::isdigit(static_cast<unsigned char>(d));
                 })) {
        current_ = {Tok::Var, word,
                    static_cast<unsigned>(std::stoul(word.substr(1))), start};
      } else {
        current_ = {Tok::Ident, word, 0, start};
      }
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      // Bare numerals act as identifiers so element-style constants parse.
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
      current_ = {Tok::Ident, std::string(text_.substr(start, pos_ - start)),
                  0, start};
      return;
    }
    throw Error(ErrorKind::Parse,
                std::string("unexpected character '") + c + "'", pos_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token current_;
};

// --- parser -------------------------------------------------------------------

class Parser {
 public:
  Parser(std::string_view text, const Signature& sig)
      : lexer_(text), sig_(sig) {}

  Formula parse() {
    Formula f = parseFormula();
    expect(Tok::End, "end of input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& expected) {
    throw Error(ErrorKind::Parse, "expected " + expected, lexer_.peek().pos);
  }

  Token expect(Tok kind, const std::string& what) {
    if (lexer_.peek().kind != kind) fail(what);
    return lexer_.take();
  }

  Formula parseFormula() {
    Tok k = lexer_.peek().kind;
    if (k == Tok::Forall || k == Tok::Exists) {
      lexer_.take();
      Token var = expect(Tok::Var, "a variable");
      expect(Tok::Dot, "'.'");
      Formula body = parseFormula();
      return k == Tok::Forall ? Formula::forall(var.varIndex, std::move(body))
                              : Formula::exists(var.varIndex, std::move(body));
    }
    return parseImpl();
  }

  Formula parseImpl() {
    Formula lhs = parseDisj();
    if (lexer_.peek().kind == Tok::Arrow) {
      lexer_.take();
      Formula rhs = parseImpl();
      return Formula::implication(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Formula parseDisj() {
    Formula f = parseConj();
    while (lexer_.peek().kind == Tok::Pipe) {
      lexer_.take();
      f = Formula::disjunction(std::move(f), parseConj());
    }
    return f;
  }

  Formula parseConj() {
    Formula f = parseNeg();
    while (lexer_.peek().kind == Tok::Amp) {
      lexer_.take();
      f = Formula::conjunction(std::move(f), parseNeg());
    }
    return f;
  }

  Formula parseNeg() {
    if (lexer_.peek().kind == Tok::Tilde) {
      lexer_.take();
      return Formula::negation(parseNeg());
    }
    return parseAtom();
  }

  Formula parseAtom() {
    const Token& t = lexer_.peek();
    switch (t.kind) {
      case Tok::True:
        lexer_.take();
        return Formula::truth();
      case Tok::False:
        lexer_.take();
        return Formula::falsity();
      case Tok::LParen: {
        lexer_.take();
        Formula f = parseFormula();
        expect(Tok::RParen, "')'");
        return f;
      }
      case Tok::Ident: {
        // Either a relation atom or the left term of an equation.
        Token ident = lexer_.take();
        if (lexer_.peek().kind == Tok::LParen &&
            sig_.relations.count(ident.text)) {
          std::vector<Term> args = parseArgList();
          unsigned arity = sig_.relations.at(ident.text);
          if (args.size() != arity)
            throw Error(ErrorKind::Signature,
                        "relation " + ident.text + " expects " +
                            std::to_string(arity) + " arguments, got " +
                            std::to_string(args.size()));
          return Formula::atom(ident.text, std::move(args));
        }
        Term lhs = finishTerm(ident);
        return parseEquation(std::move(lhs));
      }
      case Tok::Var: {
        Token var = lexer_.take();
        return parseEquation(Term::variable(var.varIndex));
      }
      default:
        fail("a formula");
    }
  }

  Formula parseEquation(Term lhs) {
    if (!sig_.equality)
      throw Error(ErrorKind::Signature, "signature has no equality");
    expect(Tok::Eq, "'='");
    Term rhs = parseTerm();
    return Formula::equal(std::move(lhs), std::move(rhs));
  }

  std::vector<Term> parseArgList() {
    expect(Tok::LParen, "'('");
    std::vector<Term> args;
    args.push_back(parseTerm());
    while (lexer_.peek().kind == Tok::Comma) {
      lexer_.take();
      args.push_back(parseTerm());
    }
    expect(Tok::RParen, "')'");
    return args;
  }

  Term parseTerm() {
    const Token& t = lexer_.peek();
    if (t.kind == Tok::Var) {
      return Term::variable(lexer_.take().varIndex);
    }
    if (t.kind == Tok::Ident) {
      Token ident = lexer_.take();
      return finishTerm(ident);
    }
    fail("a term");
  }

  Term finishTerm(const Token& ident) {
    if (lexer_.peek().kind == Tok::LParen) {
      auto fn = sig_.functions.find(ident.text);
      if (fn == sig_.functions.end())
        throw Error(ErrorKind::Signature,
                    "unknown function symbol " + ident.text);
      std::vector<Term> args = parseArgList();
      if (args.size() != fn->second)
        throw Error(ErrorKind::Signature,
                    "function " + ident.text + " expects " +
                        std::to_string(fn->second) + " arguments, got " +
                        std::to_string(args.size()));
      return Term::apply(ident.text, std::move(args));
    }
    if (!sig_.constants.count(ident.text))
      throw Error(ErrorKind::Signature,
                  "unknown constant symbol " + ident.text);
    return Term::constant(ident.text);
  }

  Lexer lexer_;
  const Signature& sig_;
};

// --- printer ------------------------------------------------------------------

void printTerm(std::ostringstream& out, const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Variable:
      out << "y" << t.index();
      return;
    case Term::Kind::Constant:
      out << t.name();
      return;
    case Term::Kind::Apply:
      out << t.name() << "(";
      for (std::size_t k = 0; k < t.args().size(); ++k) {
        if (k) out << ", ";
        printTerm(out, t.args()[k]);
      }
      out << ")";
      return;
  }
}

// Precedence: quantifiers 0 (maximal scope), -> 1, | 2, & 3, ~ 4, atoms 5.
void printFormula(std::ostringstream& out, const Formula& f, int parent) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Truth:
      out << "true";
      return;
    case K::Falsity:
      out << "false";
      return;
    case K::Atom: {
      out << f.relation() << "(";
      for (std::size_t k = 0; k < f.args().size(); ++k) {
        if (k) out << ", ";
        printTerm(out, f.args()[k]);
      }
      out << ")";
      return;
    }
    case K::Equal:
      printTerm(out, f.lhs_term());
      out << " = ";
      printTerm(out, f.rhs_term());
      return;
    case K::Not:
      out << "~";
      printFormula(out, f.operand(), 4);
      return;
    case K::And: {
      bool paren = parent > 3;
      if (paren) out << "(";
      printFormula(out, f.lhs(), 3);
      out << " & ";
      printFormula(out, f.rhs(), 4);
      if (paren) out << ")";
      return;
    }
    case K::Or: {
      bool paren = parent > 2;
      if (paren) out << "(";
      printFormula(out, f.lhs(), 2);
      out << " | ";
      printFormula(out, f.rhs(), 3);
      if (paren) out << ")";
      return;
    }
    case K::Implies: {
      bool paren = parent > 1;
      if (paren) out << "(";
      printFormula(out, f.lhs(), 2);
      out << " -> ";
      printFormula(out, f.rhs(), 1);
      if (paren) out << ")";
      return;
    }
    case K::ForAll:
    case K::Exists: {
      bool paren = parent > 0;
      if (paren) out << "(";
      out << (f.kind() == K::ForAll ? "forall y" : "exists y") << f.variable()
          << ". ";
      printFormula(out, f.body(), 0);
      if (paren) out << ")";
      return;
    }
  }
}

void collectFreeTerm(const Term& t, const std::set<unsigned>& bound,
                     unsigned& maxFree, bool& any) {
  switch (t.kind()) {
    case Term::Kind::Variable:
      if (!bound.count(t.index())) {
        maxFree = std::max(maxFree, t.index());
        any = true;
      }
      return;
    case Term::Kind::Constant:
      return;
    case Term::Kind::Apply:
      for (const Term& a : t.args()) collectFreeTerm(a, bound, maxFree, any);
      return;
  }
}

void collectFree(const Formula& f, std::set<unsigned>& bound,
                 unsigned& maxFree, bool& any) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Truth:
    case K::Falsity:
      return;
    case K::Atom:
      for (const Term& a : f.args()) collectFreeTerm(a, bound, maxFree, any);
      return;
    case K::Equal:
      collectFreeTerm(f.lhs_term(), bound, maxFree, any);
      collectFreeTerm(f.rhs_term(), bound, maxFree, any);
      return;
    case K::Not:
      collectFree(f.operand(), bound, maxFree, any);
      return;
    case K::And:
    case K::Or:
    case K::Implies:
      collectFree(f.lhs(), bound, maxFree, any);
      collectFree(f.rhs(), bound, maxFree, any);
      return;
    case K::ForAll:
    case K::Exists: {
      bool wasBound = bound.count(f.variable()) > 0;
      bound.insert(f.variable());
      collectFree(f.body(), bound, maxFree, any);
      if (!wasBound) bound.erase(f.variable());
      return;
    }
  }
}

Term renameTerm(const Term& t, const std::map<unsigned, unsigned>& env) {
  switch (t.kind()) {
    case Term::Kind::Variable: {
      auto it = env.find(t.index());
      return Term::variable(it == env.end() ? t.index() : it->second);
    }
    case Term::Kind::Constant:
      return t;
    case Term::Kind::Apply: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const Term& a : t.args()) args.push_back(renameTerm(a, env));
      return Term::apply(t.name(), std::move(args));
    }
  }
  return t;
}

Formula renameBound(const Formula& f, unsigned depth,
                    std::map<unsigned, unsigned>& env) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Truth:
    case K::Falsity:
      return f;
    case K::Atom: {
      std::vector<Term> args;
      args.reserve(f.args().size());
      for (const Term& a : f.args()) args.push_back(renameTerm(a, env));
      return Formula::atom(f.relation(), std::move(args));
    }
    case K::Equal:
      return Formula::equal(renameTerm(f.lhs_term(), env),
                            renameTerm(f.rhs_term(), env));
    case K::Not:
      return Formula::negation(renameBound(f.operand(), depth, env));
    case K::And:
      return Formula::conjunction(renameBound(f.lhs(), depth, env),
                                  renameBound(f.rhs(), depth, env));
    case K::Or:
      return Formula::disjunction(renameBound(f.lhs(), depth, env),
                                  renameBound(f.rhs(), depth, env));
    case K::Implies:
      return Formula::implication(renameBound(f.lhs(), depth, env),
                                  renameBound(f.rhs(), depth, env));
    case K::ForAll:
    case K::Exists: {
      unsigned canonical = depth;
      auto it = env.find(f.variable());
      std::optional<unsigned> saved;
      if (it != env.end()) saved = it->second;
      env[f.variable()] = canonical;
      Formula body = renameBound(f.body(), depth + 1, env);
      if (saved)
        env[f.variable()] = *saved;
      else
        env.erase(f.variable());
      return f.kind() == K::ForAll ? Formula::forall(canonical, std::move(body))
                                   : Formula::exists(canonical,
                                                     std::move(body));
    }
  }
  return f;
}

}  // namespace

Formula parse_formula(std::string_view text, const Signature& sig) {
  sig.validate();
  Parser parser(text, sig);
  return parser.parse();
}

std::string to_canonical(const Formula& phi) {
  std::ostringstream out;
  printFormula(out, phi, 0);
  return out.str();
}

unsigned free_variable_bound(const Formula& phi) {
  std::set<unsigned> bound;
  unsigned maxFree = 0;
  bool any = false;
  collectFree(phi, bound, maxFree, any);
  return any ? maxFree + 1 : 0;
}

unsigned connective_count(const Formula& phi) {
  using K = Formula::Kind;
  switch (phi.kind()) {
    case K::Truth:
    case K::Falsity:
    case K::Atom:
    case K::Equal:
      return 0;
    case K::Not:
      return 1 + connective_count(phi.operand());
    case K::And:
    case K::Or:
    case K::Implies:
      return 1 + connective_count(phi.lhs()) + connective_count(phi.rhs());
    case K::ForAll:
    case K::Exists:
      return 1 + connective_count(phi.body());
  }
  return 0;
}

unsigned quantifier_depth(const Formula& phi) {
  using K = Formula::Kind;
  switch (phi.kind()) {
    case K::Truth:
    case K::Falsity:
    case K::Atom:
    case K::Equal:
      return 0;
    case K::Not:
      return quantifier_depth(phi.operand());
    case K::And:
    case K::Or:
    case K::Implies:
      return std::max(quantifier_depth(phi.lhs()),
                      quantifier_depth(phi.rhs()));
    case K::ForAll:
    case K::Exists:
      return 1 + quantifier_depth(phi.body());
  }
  return 0;
}

std::vector<Formula> subformulas(const Formula& phi) {
  std::vector<Formula> out;
  std::function<void(const Formula&)> walk = [&](const Formula& f) {
    out.push_back(f);
    switch (f.kind()) {
      case Formula::Kind::Not:
        walk(f.operand());
        break;
      case Formula::Kind::And:
      case Formula::Kind::Or:
      case Formula::Kind::Implies:
        walk(f.lhs());
        walk(f.rhs());
        break;
      case Formula::Kind::ForAll:
      case Formula::Kind::Exists:
        walk(f.body());
        break;
      default:
        break;
    }
  };
  walk(phi);
  return out;
}

unsigned stratum(const Formula& phi) {
  unsigned n = free_variable_bound(phi);
  unsigned c = connective_count(phi);
  return std::max(n, c + 1);
}

Formula canonicalize(const Formula& phi, unsigned prefix) {
  unsigned n = free_variable_bound(phi);
  if (n > prefix)
    throw Error(ErrorKind::Signature,
                "formula has free variables beyond y" +
                    std::to_string(prefix == 0 ? 0 : prefix - 1));
  std::map<unsigned, unsigned> env;
  return renameBound(phi, prefix, env);
}

Formula canonicalize(const Formula& phi) {
  return canonicalize(phi, free_variable_bound(phi));
}

Formula eliminate_exists(const Formula& phi) {
  using K = Formula::Kind;
  switch (phi.kind()) {
    case K::Truth:
    case K::Falsity:
    case K::Atom:
    case K::Equal:
      return phi;
    case K::Not:
      return Formula::negation(eliminate_exists(phi.operand()));
    case K::And:
      return Formula::conjunction(eliminate_exists(phi.lhs()),
                                  eliminate_exists(phi.rhs()));
    case K::Or:
      return Formula::disjunction(eliminate_exists(phi.lhs()),
                                  eliminate_exists(phi.rhs()));
    case K::Implies:
      return Formula::implication(eliminate_exists(phi.lhs()),
                                  eliminate_exists(phi.rhs()));
    case K::ForAll:
      return Formula::forall(phi.variable(), eliminate_exists(phi.body()));
    case K::Exists:
      return Formula::negation(Formula::forall(
          phi.variable(),
          Formula::negation(eliminate_exists(phi.body()))));
  }
  return phi;
}

namespace {

std::vector<Term> scopeTerms(const Signature& sig, unsigned scope) {
  std::vector<Term> terms;
  for (unsigned v = 0; v < scope; ++v) terms.push_back(Term::variable(v));
  for (const std::string& c : sig.constants) terms.push_back(Term::constant(c));
  return terms;
}

// Formulas with exactly `budget` connectives+quantifiers over y0..y_{scope-1}.
const std::vector<Formula>& generate(
    const Signature& sig, unsigned scope, unsigned budget,
    std::map<std::pair<unsigned, unsigned>, std::vector<Formula>>& memo) {
  auto key = std::make_pair(scope, budget);
  auto hit = memo.find(key);
  if (hit != memo.end()) return hit->second;

  std::vector<Formula> out;
  if (budget == 0) {
    out.push_back(Formula::truth());
    out.push_back(Formula::falsity());
    std::vector<Term> terms = scopeTerms(sig, scope);
    if (!terms.empty()) {
      for (const auto& [name, arity] : sig.relations) {
        std::vector<std::size_t> pick(arity, 0);
        while (true) {
          std::vector<Term> args;
          for (std::size_t p : pick) args.push_back(terms[p]);
          out.push_back(Formula::atom(name, std::move(args)));
          std::size_t k = 0;
          for (; k < arity; ++k) {
            if (++pick[k] < terms.size()) break;
            pick[k] = 0;
          }
          if (k == arity) break;
        }
      }
    }
    if (sig.equality) {
      for (const Term& a : terms)
        for (const Term& b : terms) out.push_back(Formula::equal(a, b));
    }
  } else {
    for (const Formula& f : generate(sig, scope, budget - 1, memo))
      out.push_back(Formula::negation(f));
    for (unsigned b1 = 0; b1 + 1 <= budget; ++b1) {
      unsigned b2 = budget - 1 - b1;
      for (const Formula& f : generate(sig, scope, b1, memo)) {
        for (const Formula& g : generate(sig, scope, b2, memo)) {
          out.push_back(Formula::conjunction(f, g));
          out.push_back(Formula::disjunction(f, g));
          out.push_back(Formula::implication(f, g));
        }
      }
    }
    for (const Formula& f : generate(sig, scope + 1, budget - 1, memo)) {
      out.push_back(Formula::forall(scope, f));
      out.push_back(Formula::exists(scope, f));
    }
  }
  return memo.emplace(key, std::move(out)).first->second;
}

}  // namespace

std::vector<Formula> enumerate_stratum(const Signature& sig, unsigned k) {
  if (k > 4)
    throw Error(ErrorKind::Budget,
                "stratum enumeration is guarded to k <= 4 (got " +
                    std::to_string(k) + ")");
  sig.validate();
  if (!sig.functions.empty())
    throw Error(ErrorKind::Signature,
                "stratum enumeration requires a relational signature");
  std::vector<Formula> result;
  if (k == 0) return result;

  std::map<std::pair<unsigned, unsigned>, std::vector<Formula>> memo;
  std::set<std::string> seen;
  for (unsigned budget = 0; budget < k; ++budget) {
    for (const Formula& f : generate(sig, k, budget, memo)) {
      if (free_variable_bound(f) > k) continue;
      Formula canon = canonicalize(f);
      std::string text = to_canonical(canon);
      if (seen.insert(std::move(text)).second) result.push_back(canon);
    }
  }
  return result;
}

}  // namespace dynmod
