#include "dynmod/semantics.hpp"

#include <algorithm>
#include <memory>
#include <random>

namespace dynmod {

// --- shared helpers -----------------------------------------------------------

namespace {

Element term_value(const StagedStructure& s, const Term& t,
                   const std::vector<Element>& vals) {
  switch (t.kind()) {
    case Term::Kind::Variable: {
      if (t.index() >= vals.size())
        throw Error(ErrorKind::Signature,
                    "variable y" + std::to_string(t.index()) +
                        " has no value in the current assignment");
      return vals[t.index()];
    }
    case Term::Kind::Constant:
      return s.constant(t.name());
    case Term::Kind::Apply: {
      Tuple args;
      args.reserve(t.args().size());
      for (const Term& a : t.args()) args.push_back(term_value(s, a, vals));
      return s.apply_function(t.name(), args);
    }
  }
  throw Error(ErrorKind::Signature, "malformed term");
}

bool atom_holds(const StagedStructure& s, const Formula& f,
                const std::vector<Element>& vals, const Context& ctx) {
  const RelationFamily& fam = s.relation(f.relation());
  Tuple tuple;
  tuple.reserve(f.args().size());
  for (const Term& a : f.args()) tuple.push_back(term_value(s, a, vals));
  if (fam.mode() == RelationFamily::Mode::LimitRestricted)
    return fam.member(Context{}, tuple);
  // Explicit families are read at the sub-context of the argument positions:
  // a variable argument contributes its own context entry, any other term the
  // least stage containing its value.
  std::vector<IndexPoint> argStages;
  argStages.reserve(f.args().size());
  for (std::size_t k = 0; k < f.args().size(); ++k) {
    const Term& a = f.args()[k];
    if (a.kind() == Term::Kind::Variable && a.index() < ctx.size())
      argStages.push_back(ctx.at(a.index()));
    else
      argStages.push_back(s.universe().least_stage(tuple[k]));
  }
  return fam.member(Context(std::move(argStages)), tuple);
}

bool atom_holds_at_bound(const StagedStructure& s, const Formula& f,
                         const std::vector<Element>& vals, IndexPoint bound) {
  const RelationFamily& fam = s.relation(f.relation());
  Tuple tuple;
  tuple.reserve(f.args().size());
  for (const Term& a : f.args()) tuple.push_back(term_value(s, a, vals));
  if (fam.mode() == RelationFamily::Mode::LimitRestricted)
    return fam.member(Context{}, tuple);
  Context uniform(std::vector<IndexPoint>(f.args().size(), bound));
  return fam.member(uniform, tuple);
}

}  // namespace

Valuation place_valuation(const StagedStructure& s,
                          const std::vector<Element>& elements) {
  Valuation v;
  v.elements = elements;
  std::vector<IndexPoint> stages;
  stages.reserve(elements.size());
  for (Element e : elements) stages.push_back(s.universe().least_stage(e));
  v.context = Context(std::move(stages));
  return v;
}

IndexChooser default_chooser(const LargenessRelation& rel) {
  HorizonFunction h = rel.horizon();
  return [h](const Context& c, IndexPoint) { return h(c); };
}

IndexChooser random_chooser(const LargenessRelation& rel, std::uint64_t seed) {
  HorizonFunction h = rel.horizon();
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [h, rng](const Context& c, IndexPoint maxAllowed) {
    IndexPoint lo = h(c);
    if (lo > maxAllowed)
      throw Error(ErrorKind::Headroom,
                  "no index above the horizon fits under the headroom at " +
                      c.to_string());
    std::uniform_int_distribution<IndexPoint> pick(lo, maxAllowed);
    return pick(*rng);
  };
}

// --- classical oracle -----------------------------------------------------------

namespace {

bool eval_tarski(const StagedStructure& s, const Formula& f,
                 std::vector<Element>& vals, IndexPoint bound) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Truth: return true;
    case K::Falsity: return false;
    case K::Atom: return atom_holds_at_bound(s, f, vals, bound);
    case K::Equal:
      return term_value(s, f.lhs_term(), vals) ==
             term_value(s, f.rhs_term(), vals);
    case K::Not: return !eval_tarski(s, f.operand(), vals, bound);
    case K::And: {
      bool a = eval_tarski(s, f.lhs(), vals, bound);
      bool b = eval_tarski(s, f.rhs(), vals, bound);
      return a && b;
    }
    case K::Or: {
      bool a = eval_tarski(s, f.lhs(), vals, bound);
      bool b = eval_tarski(s, f.rhs(), vals, bound);
      return a || b;
    }
    case K::Implies: {
      bool a = eval_tarski(s, f.lhs(), vals, bound);
      bool b = eval_tarski(s, f.rhs(), vals, bound);
      return !a || b;
    }
    case K::ForAll: {
      bool all = true;
      for (Element b : s.stage_elements(bound)) {
        vals.push_back(b);
        bool r = eval_tarski(s, f.body(), vals, bound);
        vals.pop_back();
        all = all && r;
      }
      return all;
    }
    case K::Exists: {
      bool any = false;
      for (Element b : s.stage_elements(bound)) {
        vals.push_back(b);
        bool r = eval_tarski(s, f.body(), vals, bound);
        vals.pop_back();
        any = any || r;
      }
      return any;
    }
  }
  return false;
}

}  // namespace

bool eval_classical(const StagedStructure& s, const Formula& phi,
                    const std::vector<Element>& valuation, IndexPoint bound) {
  if (bound < 1 || bound > s.headroom())
    throw Error(ErrorKind::Headroom,
                "bound " + std::to_string(bound) + " outside [1, " +
                    std::to_string(s.headroom()) + "]");
  for (Element e : valuation)
    if (!s.universe().in_stage(e, bound))
      throw Error(ErrorKind::Range,
                  "assignment value outside the bound stage");
  Formula canon = canonicalize(phi, static_cast<unsigned>(valuation.size()));
  std::vector<Element> vals = valuation;
  return eval_tarski(s, canon, vals, bound);
}

// --- reflection evaluator ---------------------------------------------------------

namespace {

struct ReflectionEvaluator {
  const StagedStructure& s;
  const LargenessRelation& rel;
  const IndexChooser& chooser;
  IndexPoint headroom;
  ReflectionResult result;

  bool eval(const Formula& f, std::vector<Element>& vals, const Context& ctx) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::Truth: return true;
      case K::Falsity: return false;
      case K::Atom: return atom_holds(s, f, vals, ctx);
      case K::Equal:
        return term_value(s, f.lhs_term(), vals) ==
               term_value(s, f.rhs_term(), vals);
      case K::Not: return !eval(f.operand(), vals, ctx);
      case K::And: {
        bool a = eval(f.lhs(), vals, ctx);
        bool b = eval(f.rhs(), vals, ctx);
        return a && b;
      }
      case K::Or: {
        bool a = eval(f.lhs(), vals, ctx);
        bool b = eval(f.rhs(), vals, ctx);
        return a || b;
      }
      case K::Implies: {
        bool a = eval(f.lhs(), vals, ctx);
        bool b = eval(f.rhs(), vals, ctx);
        return !a || b;
      }
      case K::ForAll: {
        unsigned below = quantifier_depth(f.body());
        if (headroom <= below)
          throw Error(ErrorKind::Headroom,
                      "quantifier depth exceeds the headroom");
        IndexPoint maxAllowed = headroom - static_cast<IndexPoint>(below);
        IndexPoint i = chooser(ctx, maxAllowed);
        if (!rel.is_large(ctx, i))
          throw Error(ErrorKind::ChooserViolation,
                      "chooser returned " + std::to_string(i) +
                          " below the horizon of " + ctx.to_string());
        if (i > headroom)
          throw Error(ErrorKind::Headroom,
                      "chooser exceeded the headroom at " + ctx.to_string());
        result.trace.emplace_back(ctx, i);
        result.maxIndexUsed = std::max(result.maxIndexUsed, i);
        Context extended = ctx.extended(i);
        result.contextsVisited.insert(extended);
        bool all = true;
        for (Element b : s.stage_elements(i)) {
          vals.push_back(b);
          bool r = eval(f.body(), vals, extended);
          vals.pop_back();
          all = all && r;
        }
        return all;
      }
      case K::Exists:
        throw Error(ErrorKind::Signature,
                    "existentials must be eliminated before reflection");
    }
    return false;
  }
};

void check_valuation(const StagedStructure& s, const Valuation& v) {
  if (v.elements.size() != v.context.size())
    throw Error(ErrorKind::Range,
                "valuation and context lengths differ");
  for (std::size_t k = 0; k < v.elements.size(); ++k)
    if (!s.universe().in_stage(v.elements[k], v.context.at(k)))
      throw Error(ErrorKind::Range,
                  "valuation value outside its context stage");
}

}  // namespace

ReflectionResult eval_reflection(const StagedStructure& s, const Formula& phi,
                                 const Valuation& v,
                                 const LargenessRelation& rel,
                                 const IndexChooser& chooser,
                                 IndexPoint headroom) {
  if (headroom < 1 || headroom > s.headroom())
    throw Error(ErrorKind::Headroom,
                "headroom " + std::to_string(headroom) + " outside [1, " +
                    std::to_string(s.headroom()) + "]");
  check_valuation(s, v);
  Formula canon = eliminate_exists(
      canonicalize(phi, static_cast<unsigned>(v.elements.size())));
  ReflectionEvaluator ev{s, rel, chooser, headroom, {}};
  ev.result.contextsVisited.insert(v.context);
  for (IndexPoint i : v.context.indices())
    ev.result.maxIndexUsed = std::max(ev.result.maxIndexUsed, i);
  std::vector<Element> vals = v.elements;
  ev.result.verdict = ev.eval(canon, vals, v.context);
  return ev.result;
}

ReflectionResult eval_reflection(const StagedStructure& s, const Formula& phi,
                                 const Valuation& v,
                                 const LargenessRelation& rel,
                                 IndexPoint headroom) {
  IndexChooser chooser = default_chooser(rel);
  return eval_reflection(s, phi, v, rel, chooser, headroom);
}

// --- witness closure ---------------------------------------------------------------

namespace {

struct ClosureEngine {
  const StagedStructure& s;
  IndexPoint headroom;
  HorizonFunction h = HorizonFunction::constant(1);
  bool changed = false;
  bool finalPass = false;
  std::map<std::pair<std::string, Context>, IndexPoint>* stableFrom = nullptr;
  std::vector<WitnessClosureReport::ExhaustedCase>* exhausted = nullptr;

  // Reflection evaluation under the current horizon, default chooser.
  bool eval(const Formula& f, std::vector<Element>& vals, const Context& ctx) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::Truth: return true;
      case K::Falsity: return false;
      case K::Atom: return atom_holds(s, f, vals, ctx);
      case K::Equal:
        return term_value(s, f.lhs_term(), vals) ==
               term_value(s, f.rhs_term(), vals);
      case K::Not: return !eval(f.operand(), vals, ctx);
      case K::And:
        return eval(f.lhs(), vals, ctx) && eval(f.rhs(), vals, ctx);
      case K::Or:
        return eval(f.lhs(), vals, ctx) || eval(f.rhs(), vals, ctx);
      case K::Implies:
        return !eval(f.lhs(), vals, ctx) || eval(f.rhs(), vals, ctx);
      case K::ForAll:
        return forall_at(f, vals, ctx, h(ctx));
      case K::Exists:
        throw Error(ErrorKind::Signature,
                    "existentials must be eliminated before witness closure");
    }
    return false;
  }

  bool forall_at(const Formula& f, std::vector<Element>& vals,
                 const Context& ctx, IndexPoint stageIndex) {
    if (stageIndex > headroom)
      throw Error(ErrorKind::Headroom,
                  "horizon exceeded the headroom during closure");
    Context extended = ctx.extended(stageIndex);
    for (Element b : s.stage_elements(stageIndex)) {
      vals.push_back(b);
      bool r = eval(f.body(), vals, extended);
      vals.pop_back();
      if (!r) return false;
    }
    return true;
  }

  // Innermost-first stabilization over every reachable (context, valuation).
  void stabilize(const Formula& f, std::vector<Element>& vals,
                 const Context& ctx) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::Truth:
      case K::Falsity:
      case K::Atom:
      case K::Equal:
        return;
      case K::Not:
        stabilize(f.operand(), vals, ctx);
        return;
      case K::And:
      case K::Or:
      case K::Implies:
        stabilize(f.lhs(), vals, ctx);
        stabilize(f.rhs(), vals, ctx);
        return;
      case K::ForAll: {
        unsigned below = quantifier_depth(f.body());
        if (headroom <= below)
          throw Error(ErrorKind::Headroom,
                      "quantifier depth exceeds the headroom");
        IndexPoint end = headroom - static_cast<IndexPoint>(below);
        IndexPoint lo = h(ctx);
        if (lo > end)
          throw Error(ErrorKind::Headroom,
                      "no stage above the horizon fits under the headroom at " +
                          ctx.to_string());
        for (IndexPoint stage = lo; stage <= end; ++stage) {
          Context extended = ctx.extended(stage);
          for (Element b : s.stage_elements(stage)) {
            vals.push_back(b);
            stabilize(f.body(), vals, extended);
            vals.pop_back();
          }
        }
        scan(f, vals, ctx, lo, end);
        return;
      }
      case K::Exists:
        throw Error(ErrorKind::Signature,
                    "existentials must be eliminated before witness closure");
    }
  }

  void scan(const Formula& f, std::vector<Element>& vals, const Context& ctx,
            IndexPoint lo, IndexPoint end) {
    std::vector<bool> verdicts;
    verdicts.reserve(end - lo + 1);
    for (IndexPoint stage = lo; stage <= end; ++stage)
      verdicts.push_back(forall_at(f, vals, ctx, stage));

    std::size_t last = verdicts.size() - 1;
    std::size_t k = last;
    while (k > 0 && verdicts[k - 1] == verdicts[last]) --k;
    IndexPoint stablePoint = lo + static_cast<IndexPoint>(k);

    if (stablePoint > h(ctx)) {
      h.raise(ctx, stablePoint);
      changed = true;
    }

    if (finalPass) {
      auto key = std::make_pair(to_canonical(f), ctx);
      auto it = stableFrom->find(key);
      if (it == stableFrom->end() || it->second < stablePoint)
        (*stableFrom)[key] = stablePoint;

      bool nonincreasing = true;
      for (std::size_t p = 1; p < verdicts.size(); ++p)
        if (verdicts[p] && !verdicts[p - 1]) nonincreasing = false;
      if (stablePoint == end && verdicts.size() >= 2 && !nonincreasing)
        exhausted->push_back({to_canonical(f), ctx, vals});
    }
  }
};

std::vector<std::pair<Context, std::vector<Element>>> root_pairs(
    const StagedStructure& s, unsigned freeVars, IndexPoint headroom) {
  std::vector<std::pair<Context, std::vector<Element>>> pairs;
  if (freeVars == 0) {
    pairs.emplace_back(Context{}, std::vector<Element>{});
    return pairs;
  }
  std::vector<Element> domain = s.stage_elements(headroom);
  std::vector<std::size_t> pick(freeVars, 0);
  while (true) {
    std::vector<Element> vals;
    vals.reserve(freeVars);
    for (std::size_t p : pick) vals.push_back(domain[p]);
    Valuation v = place_valuation(s, vals);
    pairs.emplace_back(v.context, std::move(vals));
    std::size_t k = 0;
    for (; k < freeVars; ++k) {
      if (++pick[k] < domain.size()) break;
      pick[k] = 0;
    }
    if (k == freeVars) break;
  }
  return pairs;
}

}  // namespace

WitnessClosureReport witness_close(const StagedStructure& s,
                                   std::span<const Formula> formulas,
                                   IndexPoint headroom) {
  if (headroom < 2)
    throw Error(ErrorKind::Range, "witness closure needs headroom >= 2");
  if (headroom > s.headroom())
    throw Error(ErrorKind::Headroom,
                "headroom " + std::to_string(headroom) +
                    " exceeds the structure headroom");

  struct Root {
    Formula formula;
    std::vector<std::pair<Context, std::vector<Element>>> pairs;
  };
  std::vector<Root> roots;
  for (const Formula& phi : formulas) {
    unsigned n = free_variable_bound(phi);
    Formula canon = eliminate_exists(canonicalize(phi, n));
    roots.push_back({std::move(canon), root_pairs(s, n, headroom)});
  }

  ClosureEngine engine{s, headroom};
  const unsigned iterationCap = headroom * 64 + 64;
  unsigned iterations = 0;
  do {
    engine.changed = false;
    for (const Root& root : roots) {
      for (const auto& [ctx, vals] : root.pairs) {
        std::vector<Element> work = vals;
        engine.stabilize(root.formula, work, ctx);
      }
    }
    if (++iterations > iterationCap)
      throw Error(ErrorKind::Exhausted,
                  "witness closure failed to reach a fixpoint");
  } while (engine.changed);

  WitnessClosureReport report;
  engine.finalPass = true;
  engine.stableFrom = &report.stableFrom;
  engine.exhausted = &report.exhausted;
  for (const Root& root : roots) {
    for (const auto& [ctx, vals] : root.pairs) {
      std::vector<Element> work = vals;
      engine.stabilize(root.formula, work, ctx);
    }
  }
  report.horizon = engine.h;
  return report;
}

WitnessClosureReport witness_close(const StagedStructure& s,
                                   const Formula& phi, IndexPoint headroom) {
  return witness_close(s, std::span<const Formula>(&phi, 1), headroom);
}

// --- index independence ---------------------------------------------------------

IndependenceReport check_independence(const StagedStructure& s,
                                      const Formula& phi,
                                      const WitnessClosureReport& report,
                                      unsigned trials, std::uint64_t seed,
                                      IndexPoint headroom,
                                      const std::vector<Element>& valuation) {
  LargenessRelation rel = report.relation();
  Valuation v = place_valuation(s, valuation);
  ReflectionResult def = eval_reflection(s, phi, v, rel, headroom);

  IndependenceReport out;
  out.defaultVerdict = def.verdict;
  out.trials = trials;
  out.chooserCalls = static_cast<unsigned>(def.trace.size());
  if (out.chooserCalls == 0) return out;  // no quantifier ever chose an index

  for (unsigned t = 0; t < trials; ++t) {
    IndexChooser chooser = random_chooser(rel, seed + t);
    ReflectionResult r = eval_reflection(s, phi, v, rel, chooser, headroom);
    if (r.verdict != def.verdict) out.disagreements.push_back({t, r.verdict});
  }
  return out;
}

// --- relativization ---------------------------------------------------------------

namespace {

Formula relativize_at(const Formula& f,
                      std::span<const std::string> preds, unsigned depth) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Truth:
    case K::Falsity:
    case K::Atom:
    case K::Equal:
      return f;
    case K::Not:
      return Formula::negation(relativize_at(f.operand(), preds, depth));
    case K::And:
      return Formula::conjunction(relativize_at(f.lhs(), preds, depth),
                                  relativize_at(f.rhs(), preds, depth));
    case K::Or:
      return Formula::disjunction(relativize_at(f.lhs(), preds, depth),
                                  relativize_at(f.rhs(), preds, depth));
    case K::Implies:
      return Formula::implication(relativize_at(f.lhs(), preds, depth),
                                  relativize_at(f.rhs(), preds, depth));
    case K::ForAll:
    case K::Exists: {
      if (depth >= preds.size())
        throw Error(ErrorKind::Depth,
                    "quantifier depth exceeds the predicate list");
      Formula guard =
          Formula::atom(preds[depth], {Term::variable(f.variable())});
      Formula body = relativize_at(f.body(), preds, depth + 1);
      if (f.kind() == K::ForAll)
        return Formula::forall(
            f.variable(), Formula::implication(std::move(guard),
                                               std::move(body)));
      return Formula::exists(
          f.variable(),
          Formula::conjunction(std::move(guard), std::move(body)));
    }
  }
  return f;
}

}  // namespace

Formula relativize(const Formula& phi,
                   std::span<const std::string> boundPredicates) {
  return relativize_at(phi, boundPredicates, 0);
}

// --- locality ----------------------------------------------------------------------

LocalityReport locality_report(const StagedStructure& s,
                               std::span<const Formula> formulas,
                               const LargenessRelation& rel,
                               IndexPoint headroom,
                               const std::vector<Element>& sharedValuation) {
  LocalityReport out;
  for (const Formula& phi : formulas) {
    unsigned n = free_variable_bound(phi);
    if (n > sharedValuation.size())
      throw Error(ErrorKind::Range,
                  "shared valuation too short for a formula with " +
                      std::to_string(n) + " free variables");
    std::vector<Element> vals(sharedValuation.begin(),
                              sharedValuation.begin() + n);
    Valuation v = place_valuation(s, vals);
    ReflectionResult res = eval_reflection(s, phi, v, rel, headroom);
    out.maxIndexUsed = std::max(out.maxIndexUsed, res.maxIndexUsed);
    out.contexts.insert(res.contextsVisited.begin(),
                        res.contextsVisited.end());
  }
  return out;
}

}  // namespace dynmod
