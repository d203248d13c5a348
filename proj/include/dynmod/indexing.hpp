#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dynmod/error.hpp"

namespace dynmod {

// Stage number in a staged system. Stages are numbered from 1 so that every
// stage a formula can range over is nonempty.
using IndexPoint = std::uint32_t;

// The tuple of stage indices from which the currently instantiated variable
// values were drawn. Contexts are immutable; extension returns a new value.
class Context {
 public:
  Context() = default;
  explicit Context(std::vector<IndexPoint> indices)
      : indices_(std::move(indices)) {}
  Context(std::initializer_list<IndexPoint> indices) : indices_(indices) {}

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  IndexPoint at(std::size_t k) const { return indices_.at(k); }
  const std::vector<IndexPoint>& indices() const { return indices_; }

  Context extended(IndexPoint i) const {
    std::vector<IndexPoint> v = indices_;
    v.push_back(i);
    return Context(std::move(v));
  }

  Context prefix(std::size_t k) const {
    return Context(std::vector<IndexPoint>(indices_.begin(),
                                           indices_.begin() + k));
  }

  // Lexicographic; used for set/map keys, not the pointwise order.
  auto operator<=>(const Context&) const = default;

  // Pointwise order on equal-length contexts.
  bool pointwise_leq(const Context& other) const {
    if (size() != other.size()) return false;
    for (std::size_t k = 0; k < size(); ++k)
      if (indices_[k] > other.indices_[k]) return false;
    return true;
  }

  std::string to_string() const {
    std::string out = "(";
    for (std::size_t k = 0; k < indices_.size(); ++k) {
      if (k) out += ",";
      out += std::to_string(indices_[k]);
    }
    out += ")";
    return out;
  }

 private:
  std::vector<IndexPoint> indices_;
};

// Maps a context to the least index of its indefinitely large region. A
// finite table of exact-match overrides sits in front of a total fallback
// rule: max of the context entries plus one, or 1 on the empty context.
// A constant fallback supports horizons pinned to a fixed stage.
class HorizonFunction {
 public:
  HorizonFunction() = default;

  static HorizonFunction max_plus_one() { return HorizonFunction(); }

  static HorizonFunction constant(IndexPoint value) {
    if (value < 1) throw Error(ErrorKind::Range, "horizon values must be >= 1");
    HorizonFunction h;
    h.constant_fallback_ = true;
    h.constant_value_ = value;
    return h;
  }

  IndexPoint operator()(const Context& c) const {
    auto it = table_.find(c);
    if (it != table_.end()) return it->second;
    if (constant_fallback_) return constant_value_;
    IndexPoint m = 0;
    for (IndexPoint i : c.indices()) m = std::max(m, i);
    return m + 1;
  }

  void set(const Context& c, IndexPoint value) {
    if (value < 1) throw Error(ErrorKind::Range, "horizon values must be >= 1");
    table_[c] = value;
  }

  void raise(const Context& c, IndexPoint value) {
    auto it = table_.find(c);
    if (it == table_.end() || it->second < value) set(c, value);
  }

  const std::map<Context, IndexPoint>& table() const { return table_; }
  bool constant_fallback() const { return constant_fallback_; }
  IndexPoint constant_value() const { return constant_value_; }

 private:
  std::map<Context, IndexPoint> table_;
  bool constant_fallback_ = false;
  IndexPoint constant_value_ = 1;
};

// The indefinitely-large relation C << i, induced by a horizon function:
// C << i iff i >= h(C). Upward closure holds by construction; context
// coherence is checked, never assumed.
class LargenessRelation {
 public:
  LargenessRelation() = default;
  explicit LargenessRelation(HorizonFunction horizon)
      : horizon_(std::move(horizon)) {}

  const HorizonFunction& horizon() const { return horizon_; }

  bool is_large(const Context& c, IndexPoint i) const {
    return i >= horizon_(c);
  }

 private:
  HorizonFunction horizon_;
};

struct AxiomReport {
  struct UpwardViolation {
    Context context;
    IndexPoint i;
    IndexPoint iPrime;
  };
  struct CoherenceViolation {
    Context context;
    std::size_t position;    // k with (i_0,...,i_{k-1}) not << i_k
    IndexPoint required;     // horizon of the prefix
    IndexPoint found;        // the offending entry i_k
  };

  std::vector<UpwardViolation> upward;
  std::vector<CoherenceViolation> coherence;
  std::size_t upwardPairsChecked = 0;

  bool ok() const { return upward.empty() && coherence.empty(); }
};

// Exhaustively scans upward closure (C << i <= i' implies C << i') up to
// maxIndex and context coherence for every supplied context.
AxiomReport check_largeness_axioms(const LargenessRelation& rel,
                                   std::span<const Context> contexts,
                                   IndexPoint maxIndex);

}  // namespace dynmod
