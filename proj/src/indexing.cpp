#include "dynmod/indexing.hpp"

namespace dynmod {

AxiomReport check_largeness_axioms(const LargenessRelation& rel,
                                   std::span<const Context> contexts,
                                   IndexPoint maxIndex) {
  AxiomReport report;
  for (const Context& c : contexts) {
    for (IndexPoint i = 1; i <= maxIndex; ++i) {
      for (IndexPoint iPrime = i; iPrime <= maxIndex; ++iPrime) {
        ++report.upwardPairsChecked;
        if (rel.is_large(c, i) && !rel.is_large(c, iPrime)) {
          report.upward.push_back({c, i, iPrime});
        }
      }
    }
    for (std::size_t k = 0; k < c.size(); ++k) {
      const Context pre = c.prefix(k);
      const IndexPoint required = rel.horizon()(pre);
      if (!rel.is_large(pre, c.at(k))) {
        report.coherence.push_back({c, k, required, c.at(k)});
      }
    }
  }
  return report;
}

}  // namespace dynmod
