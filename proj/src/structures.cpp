#include "dynmod/structures.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dynmod {

using nlohmann::json;

// --- StagedUniverse ------------------------------------------------------------

namespace {
IndexPoint check_headroom_value(IndexPoint headroom) {
  if (headroom < 1)
    throw Error(ErrorKind::Schema, "headroom must be at least 1");
  return headroom;
}
}  // namespace

StagedUniverse StagedUniverse::naturals(IndexPoint headroom) {
  StagedUniverse u;
  u.mode_ = Mode::Naturals;
  u.headroom_ = check_headroom_value(headroom);
  return u;
}

StagedUniverse StagedUniverse::evens(IndexPoint headroom) {
  StagedUniverse u;
  u.mode_ = Mode::Evens;
  u.headroom_ = check_headroom_value(headroom);
  return u;
}

StagedUniverse StagedUniverse::von_neumann(IndexPoint headroom) {
  StagedUniverse u;
  u.mode_ = Mode::VonNeumann;
  u.headroom_ = check_headroom_value(headroom);
  return u;
}

StagedUniverse StagedUniverse::builtin(const std::string& name,
                                       IndexPoint headroom) {
  if (name == "naturals") return naturals(headroom);
  if (name == "evens") return evens(headroom);
  if (name == "vonNeumann") return von_neumann(headroom);
  throw Error(ErrorKind::Schema, "unknown builtin universe " + name);
}

StagedUniverse StagedUniverse::explicit_stages(
    std::vector<std::vector<std::string>> stages, IndexPoint headroom) {
  if (stages.empty())
    throw Error(ErrorKind::Schema, "explicit universe needs at least one stage");
  StagedUniverse u;
  u.mode_ = Mode::Explicit;
  u.headroom_ = check_headroom_value(headroom);
  if (static_cast<std::size_t>(headroom) < stages.size())
    throw Error(ErrorKind::Schema,
                "headroom smaller than the number of listed stages");
  std::set<std::string> present;
  for (const auto& stage : stages) {
    std::set<std::string> here(stage.begin(), stage.end());
    if (here.size() != stage.size())
      throw Error(ErrorKind::Schema, "duplicate element in a stage list");
    for (const std::string& prev : present) {
      if (!here.count(prev))
        throw Error(ErrorKind::Schema,
                    "stage lists are not cumulative: " + prev + " disappears");
    }
    for (const std::string& name : stage) {
      if (!present.count(name)) {
        u.ids_.emplace(name, static_cast<Element>(u.names_.size()));
        u.names_.push_back(name);
        present.insert(name);
      }
    }
    u.stageCounts_.push_back(u.names_.size());
  }
  if (u.stageCounts_.front() == 0)
    throw Error(ErrorKind::Schema, "stages must be nonempty from stage 1 on");
  return u;
}

IndexPoint StagedUniverse::saturation_stage() const {
  if (mode_ == Mode::Explicit)
    return static_cast<IndexPoint>(stageCounts_.size());
  return headroom_;
}

IndexPoint StagedUniverse::clamp_explicit(IndexPoint i) const {
  return std::min<IndexPoint>(i, static_cast<IndexPoint>(stageCounts_.size()));
}

std::vector<Element> StagedUniverse::stage(IndexPoint i) const {
  if (i < 1 || i > headroom_)
    throw Error(ErrorKind::Headroom,
                "stage " + std::to_string(i) + " outside [1, " +
                    std::to_string(headroom_) + "]");
  std::vector<Element> out;
  switch (mode_) {
    case Mode::Naturals:
    case Mode::VonNeumann:
      out.reserve(i);
      for (Element e = 0; e < static_cast<Element>(i); ++e) out.push_back(e);
      return out;
    case Mode::Evens:
      out.reserve(i);
      for (Element e = 0; e < static_cast<Element>(i); ++e)
        out.push_back(2 * e);
      return out;
    case Mode::Explicit: {
      std::size_t count = stageCounts_[clamp_explicit(i) - 1];
      out.reserve(count);
      for (Element e = 0; e < static_cast<Element>(count); ++e)
        out.push_back(e);
      return out;
    }
  }
  return out;
}

std::size_t StagedUniverse::stage_size(IndexPoint i) const {
  if (i < 1 || i > headroom_)
    throw Error(ErrorKind::Headroom,
                "stage " + std::to_string(i) + " outside [1, " +
                    std::to_string(headroom_) + "]");
  if (mode_ == Mode::Explicit) return stageCounts_[clamp_explicit(i) - 1];
  return i;
}

bool StagedUniverse::in_stage(Element e, IndexPoint i) const {
  if (i < 1 || i > headroom_) return false;
  switch (mode_) {
    case Mode::Naturals:
    case Mode::VonNeumann:
      return e >= 0 && e < static_cast<Element>(i);
    case Mode::Evens:
      return e >= 0 && e % 2 == 0 && e <= 2 * (static_cast<Element>(i) - 1);
    case Mode::Explicit:
      return e >= 0 &&
             e < static_cast<Element>(stageCounts_[clamp_explicit(i) - 1]);
  }
  return false;
}

IndexPoint StagedUniverse::least_stage(Element e) const {
  switch (mode_) {
    case Mode::Naturals:
    case Mode::VonNeumann:
      if (e < 0 || e >= static_cast<Element>(headroom_))
        throw Error(ErrorKind::Range, "element outside the headroom stage");
      return static_cast<IndexPoint>(e) + 1;
    case Mode::Evens:
      if (e < 0 || e % 2 != 0 || e > 2 * (static_cast<Element>(headroom_) - 1))
        throw Error(ErrorKind::Range, "element outside the headroom stage");
      return static_cast<IndexPoint>(e / 2) + 1;
    case Mode::Explicit: {
      for (std::size_t s = 0; s < stageCounts_.size(); ++s) {
        if (e >= 0 && e < static_cast<Element>(stageCounts_[s]))
          return static_cast<IndexPoint>(s) + 1;
      }
      throw Error(ErrorKind::Range, "element outside the headroom stage");
    }
  }
  throw Error(ErrorKind::Range, "element outside the headroom stage");
}

std::string StagedUniverse::element_name(Element e) const {
  if (mode_ == Mode::Explicit) {
    if (e < 0 || e >= static_cast<Element>(names_.size()))
      throw Error(ErrorKind::Range, "no such element id");
    return names_[static_cast<std::size_t>(e)];
  }
  return std::to_string(e);
}

bool StagedUniverse::has_element(const std::string& name) const {
  if (mode_ == Mode::Explicit) return ids_.count(name) > 0;
  if (name.empty() ||
      !std::all_of(name.begin(), name.end(),
                   [](char c) { return c >= '0' && c <= '9'; }))
    return false;
  Element e = 0;
  try {
    e = static_cast<Element>(std::stoll(name));
  } catch (const std::exception&) {
    return false;
  }
  return in_stage(e, headroom_);
}

Element StagedUniverse::element(const std::string& name) const {
  if (mode_ == Mode::Explicit) {
    auto it = ids_.find(name);
    if (it == ids_.end())
      throw Error(ErrorKind::Schema, "unknown element " + name);
    return it->second;
  }
  if (name.empty() ||
      !std::all_of(name.begin(), name.end(),
                   [](char c) { return c >= '0' && c <= '9'; }))
    throw Error(ErrorKind::Schema, "unknown element " + name);
  Element e = static_cast<Element>(std::stoll(name));
  if (!in_stage(e, headroom_))
    throw Error(ErrorKind::Range,
                "element " + name + " outside the headroom stage");
  return e;
}

// --- RelationFamily --------------------------------------------------------------

RelationFamily RelationFamily::limit_restricted(unsigned arity,
                                                TupleSet tuples) {
  if (arity < 1) throw Error(ErrorKind::Schema, "relation arity must be >= 1");
  RelationFamily fam;
  fam.mode_ = Mode::LimitRestricted;
  fam.arity_ = arity;
  fam.tuples_ = std::move(tuples);
  for (const Tuple& t : fam.tuples_)
    if (t.size() != arity)
      throw Error(ErrorKind::Schema, "tuple arity mismatch");
  return fam;
}

RelationFamily RelationFamily::explicit_family(
    unsigned arity, std::map<Context, TupleSet> family) {
  if (arity < 1) throw Error(ErrorKind::Schema, "relation arity must be >= 1");
  RelationFamily fam;
  fam.mode_ = Mode::ExplicitFamily;
  fam.arity_ = arity;
  fam.family_ = std::move(family);
  for (const auto& [ctx, tuples] : fam.family_) {
    if (ctx.size() != arity)
      throw Error(ErrorKind::Schema,
                  "family context length differs from the arity");
    for (const Tuple& t : tuples)
      if (t.size() != arity)
        throw Error(ErrorKind::Schema, "tuple arity mismatch");
  }
  return fam;
}

TupleSet RelationFamily::at(const StagedUniverse& universe,
                            const Context& c) const {
  if (c.size() != arity_)
    throw Error(ErrorKind::Signature,
                "context length differs from the relation arity");
  TupleSet out;
  auto inProduct = [&](const Tuple& t) {
    for (std::size_t k = 0; k < t.size(); ++k)
      if (!universe.in_stage(t[k], c.at(k))) return false;
    return true;
  };
  if (mode_ == Mode::LimitRestricted) {
    for (const Tuple& t : tuples_)
      if (inProduct(t)) out.insert(t);
    return out;
  }
  for (const auto& [listed, tuples] : family_) {
    if (!listed.pointwise_leq(c)) continue;
    for (const Tuple& t : tuples)
      if (inProduct(t)) out.insert(t);
  }
  return out;
}

bool RelationFamily::member(const Context& argStages, const Tuple& t) const {
  if (mode_ == Mode::LimitRestricted) return tuples_.count(t) > 0;
  for (const auto& [listed, tuples] : family_) {
    if (listed.pointwise_leq(argStages) && tuples.count(t)) return true;
  }
  return false;
}

TupleSet RelationFamily::all_tuples() const {
  if (mode_ == Mode::LimitRestricted) return tuples_;
  TupleSet out;
  for (const auto& [listed, tuples] : family_)
    out.insert(tuples.begin(), tuples.end());
  return out;
}

void RelationFamily::verify_monotone() const {
  if (mode_ != Mode::ExplicitFamily) return;
  for (const auto& [c1, t1] : family_) {
    for (const auto& [c2, t2] : family_) {
      if (!c1.pointwise_leq(c2)) continue;
      for (const Tuple& t : t1) {
        if (!t2.count(t))
          throw Error(ErrorKind::Monotonicity,
                      "family entry at " + c1.to_string() +
                          " is not contained in the entry at " +
                          c2.to_string());
      }
    }
  }
}

void RelationFamily::verify_within(const StagedUniverse& universe,
                                   const std::string& name) const {
  if (mode_ == Mode::LimitRestricted) {
    for (const Tuple& t : tuples_)
      for (Element e : t)
        if (!universe.in_stage(e, universe.headroom()))
          throw Error(ErrorKind::Range,
                      "relation " + name + " mentions an element outside the "
                      "headroom stage");
    return;
  }
  for (const auto& [ctx, tuples] : family_) {
    for (IndexPoint i : ctx.indices())
      if (i < 1 || i > universe.headroom())
        throw Error(ErrorKind::Range,
                    "relation " + name + " lists a context beyond headroom");
    for (const Tuple& t : tuples) {
      for (std::size_t k = 0; k < t.size(); ++k)
        if (!universe.in_stage(t[k], ctx.at(k)))
          throw Error(ErrorKind::Range,
                      "relation " + name + " has a tuple outside M_C at " +
                          ctx.to_string());
    }
  }
}

// --- StagedStructure --------------------------------------------------------------

namespace {

Context parse_context_key(const std::string& key) {
  std::vector<IndexPoint> indices;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      unsigned long v = std::stoul(part);
      if (v < 1) throw std::out_of_range("zero");
      indices.push_back(static_cast<IndexPoint>(v));
    } catch (const std::exception&) {
      throw Error(ErrorKind::Schema, "bad context key '" + key + "'");
    }
  }
  if (indices.empty())
    throw Error(ErrorKind::Schema, "bad context key '" + key + "'");
  return Context(std::move(indices));
}

TupleSet builtin_tuples(const std::string& which, const StagedUniverse& u) {
  if (!u.is_builtin())
    throw Error(ErrorKind::Schema,
                "builtin relation '" + which + "' needs a builtin universe");
  TupleSet out;
  std::vector<Element> all = u.stage(u.headroom());
  if (which == "lt" || which == "eps") {
    for (Element a : all)
      for (Element b : all)
        if (a < b) out.insert({a, b});
    return out;
  }
  if (which == "even") {
    for (Element a : all)
      if (a % 2 == 0) out.insert({a});
    return out;
  }
  throw Error(ErrorKind::Schema, "unknown builtin relation " + which);
}

unsigned builtin_arity(const std::string& which) {
  return which == "even" ? 1u : 2u;
}

const json& require(const json& doc, const char* key) {
  if (!doc.contains(key))
    throw Error(ErrorKind::Schema, std::string("missing key '") + key + "'");
  return doc.at(key);
}

}  // namespace

StagedStructure StagedStructure::load(const json& doc) {
  if (!doc.is_object())
    throw Error(ErrorKind::Schema, "structure document must be an object");
  StagedStructure s;

  const json& uni = require(doc, "universe");
  if (!doc.contains("headroom") || !doc.at("headroom").is_number_unsigned())
    throw Error(ErrorKind::Schema, "headroom must be a positive integer");
  IndexPoint headroom = doc.at("headroom").get<IndexPoint>();
  if (uni.contains("builtin")) {
    s.universe_ =
        StagedUniverse::builtin(uni.at("builtin").get<std::string>(), headroom);
  } else if (uni.contains("stages")) {
    s.universe_ = StagedUniverse::explicit_stages(
        uni.at("stages").get<std::vector<std::vector<std::string>>>(),
        headroom);
  } else {
    throw Error(ErrorKind::Schema, "universe needs 'builtin' or 'stages'");
  }

  s.signature_.equality = doc.value("equality", true);

  if (doc.contains("relations")) {
    for (const auto& [name, spec] : doc.at("relations").items()) {
      RelationFamily fam = RelationFamily::limit_restricted(1, {});
      if (spec.contains("builtin")) {
        std::string which = spec.at("builtin").get<std::string>();
        fam = RelationFamily::limit_restricted(
            builtin_arity(which), builtin_tuples(which, s.universe_));
      } else if (spec.contains("tuples")) {
        TupleSet tuples;
        unsigned arity = spec.value("arity", 0u);
        for (const auto& row : spec.at("tuples")) {
          Tuple t;
          for (const auto& cell : row)
            t.push_back(s.universe_.element(cell.get<std::string>()));
          if (arity == 0) arity = static_cast<unsigned>(t.size());
          tuples.insert(std::move(t));
        }
        if (arity == 0)
          throw Error(ErrorKind::Schema,
                      "relation " + name +
                          " needs an 'arity' when its tuple list is empty");
        fam = RelationFamily::limit_restricted(arity, std::move(tuples));
      } else if (spec.contains("family")) {
        std::map<Context, TupleSet> family;
        unsigned arity = spec.value("arity", 0u);
        for (const auto& [key, rows] : spec.at("family").items()) {
          Context c = parse_context_key(key);
          TupleSet tuples;
          for (const auto& row : rows) {
            Tuple t;
            for (const auto& cell : row)
              t.push_back(s.universe_.element(cell.get<std::string>()));
            tuples.insert(std::move(t));
          }
          if (arity == 0) arity = static_cast<unsigned>(c.size());
          family.emplace(std::move(c), std::move(tuples));
        }
        if (arity == 0)
          throw Error(ErrorKind::Schema,
                      "relation " + name +
                          " needs an 'arity' when its family is empty");
        fam = RelationFamily::explicit_family(arity, std::move(family));
      } else {
        throw Error(ErrorKind::Schema,
                    "relation " + name +
                        " needs 'builtin', 'tuples' or 'family'");
      }
      fam.verify_monotone();
      fam.verify_within(s.universe_, name);
      s.signature_.relations.emplace(name, fam.arity());
      s.relations_.emplace(name, std::move(fam));
    }
  }

  if (doc.contains("functions")) {
    for (const auto& [name, spec] : doc.at("functions").items()) {
      std::map<Tuple, Element> graph;
      unsigned arity = 0;
      for (const auto& row : require(spec, "graph")) {
        if (!row.is_array() || row.size() < 2)
          throw Error(ErrorKind::Schema,
                      "function " + name + " graph rows need args and a value");
        Tuple args;
        for (std::size_t k = 0; k + 1 < row.size(); ++k)
          args.push_back(s.universe_.element(row[k].get<std::string>()));
        Element value =
            s.universe_.element(row[row.size() - 1].get<std::string>());
        if (!s.universe_.in_stage(value, s.universe_.headroom()))
          throw Error(ErrorKind::Range,
                      "function " + name + " value outside the headroom stage");
        if (arity == 0) arity = static_cast<unsigned>(args.size());
        if (args.size() != arity)
          throw Error(ErrorKind::Schema,
                      "function " + name + " has mixed arities");
        graph.emplace(std::move(args), value);
      }
      if (arity == 0)
        throw Error(ErrorKind::Schema,
                    "function " + name + " needs a nonempty graph");
      s.signature_.functions.emplace(name, arity);
      s.functions_.emplace(name, std::move(graph));
    }
  }

  if (doc.contains("constants")) {
    for (const auto& [name, value] : doc.at("constants").items()) {
      Element e = s.universe_.element(value.get<std::string>());
      if (!s.universe_.in_stage(e, s.universe_.headroom()))
        throw Error(ErrorKind::Range,
                    "constant " + name + " outside the headroom stage");
      s.signature_.constants.insert(name);
      s.constants_.emplace(name, e);
    }
  }

  s.signature_.validate();
  return s;
}

StagedStructure StagedStructure::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::Schema, "cannot open structure file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema,
                "invalid JSON in " + path + ": " + e.what());
  }
  return load(doc);
}

std::vector<Element> StagedStructure::stage_elements(IndexPoint i) const {
  return universe_.stage(i);
}

const RelationFamily& StagedStructure::relation(const std::string& name) const {
  auto it = relations_.find(name);
  if (it == relations_.end())
    throw Error(ErrorKind::Signature, "unknown relation " + name);
  return it->second;
}

TupleSet StagedStructure::relation_at(const std::string& name,
                                      const Context& c) const {
  return relation(name).at(universe_, c);
}

Element StagedStructure::constant(const std::string& name) const {
  auto it = constants_.find(name);
  if (it == constants_.end())
    throw Error(ErrorKind::Signature, "unknown constant " + name);
  return it->second;
}

Element StagedStructure::apply_function(const std::string& name,
                                        const Tuple& args) const {
  auto fn = functions_.find(name);
  if (fn == functions_.end())
    throw Error(ErrorKind::Signature, "unknown function " + name);
  auto entry = fn->second.find(args);
  if (entry == fn->second.end()) {
    std::string rendered;
    for (Element e : args) {
      if (!rendered.empty()) rendered += ",";
      rendered += universe_.element_name(e);
    }
    throw Error(ErrorKind::StageEscape,
                "function " + name + " undefined on (" + rendered + ")");
  }
  return entry->second;
}

StagedStructure StagedStructure::with_unary_relation(
    const std::string& name, const std::set<Element>& elements) const {
  if (signature_.relations.count(name) || signature_.functions.count(name) ||
      signature_.constants.count(name))
    throw Error(ErrorKind::Signature, "symbol " + name + " already in use");
  StagedStructure out = *this;
  TupleSet tuples;
  for (Element e : elements) tuples.insert({e});
  out.relations_.emplace(name,
                         RelationFamily::limit_restricted(1, std::move(tuples)));
  out.signature_.relations.emplace(name, 1u);
  return out;
}

// --- SystemMap -----------------------------------------------------------------

SystemMap SystemMap::load(const json& doc) {
  SystemMap map;
  if (!doc.contains("pairs") || !doc.at("pairs").is_array())
    throw Error(ErrorKind::Schema, "system map needs a 'pairs' array");
  for (const auto& row : doc.at("pairs")) {
    if (!row.is_array() || row.size() != 4)
      throw Error(ErrorKind::Schema,
                  "system map pairs are [stage, element, stage, element]");
    map.pairs.push_back({row[0].get<IndexPoint>(), row[1].get<std::string>(),
                         row[2].get<IndexPoint>(), row[3].get<std::string>()});
  }
  return map;
}

SystemKind classify_system(const SystemMap& map) {
  for (const auto& p : map.pairs) {
    if (p.fromStage > p.toStage)
      throw Error(ErrorKind::MalformedMap,
                  "pair runs backwards: stage " + std::to_string(p.fromStage) +
                      " to " + std::to_string(p.toStage));
  }
  for (std::size_t a = 0; a < map.pairs.size(); ++a) {
    for (std::size_t b = a + 1; b < map.pairs.size(); ++b) {
      const auto& pa = map.pairs[a];
      const auto& pb = map.pairs[b];
      if (pa.fromStage == pb.fromStage && pa.toStage == pb.toStage &&
          pa.to == pb.to && pa.from != pb.from)
        return SystemKind::NonStandard;
    }
  }
  return SystemKind::Standard;
}

// --- paradox demonstration --------------------------------------------------------

ParadoxReport naturals_evens_constraints(IndexPoint i, IndexPoint j) {
  if (i < 1 || j < 1)
    throw Error(ErrorKind::Range, "states are numbered from 1");
  ParadoxReport report;
  report.i = i;
  report.j = j;
  report.subsetHolds = i >= 2 * j - 1;
  report.bijectionHolds = i == j;

  // Extensional cross-check against the actual stage sets.
  IndexPoint headroom = std::max(i, j);
  StagedUniverse nats = StagedUniverse::naturals(headroom);
  StagedUniverse evens = StagedUniverse::evens(headroom);
  std::vector<Element> ni = nats.stage(i);
  std::vector<Element> ej = evens.stage(j);
  std::set<Element> niSet(ni.begin(), ni.end());

  bool subsetExt = std::all_of(ej.begin(), ej.end(),
                               [&](Element e) { return niSet.count(e) > 0; });
  bool doublingLands = true;
  for (Element n : ni)
    if (!std::binary_search(ej.begin(), ej.end(), 2 * n)) doublingLands = false;
  bool bijectionExt = ni.size() == ej.size() && doublingLands;

  if (subsetExt != report.subsetHolds || bijectionExt != report.bijectionHolds)
    throw Error(ErrorKind::Range,
                "extensional check diverged from the closed form at i=" +
                    std::to_string(i) + ", j=" + std::to_string(j));
  return report;
}

}  // namespace dynmod
