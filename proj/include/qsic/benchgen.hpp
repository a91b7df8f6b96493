#pragma once

// Quantified benchmarks from quantifier-free ones: selected array constants
// become universally bound around the conjoined assertions.

#include "qsic/smtlib.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qsic {

struct QuantifyPlan {
  enum class Select {
    Unwritten, // arrays never defined as the result of a write
    All,       // every declared array constant
    Names,     // glob patterns in names
    Count,     // count arrays drawn with seed
  };
  Select select = Select::Unwritten;
  std::vector<std::string> names;
  unsigned count = 1;
  std::uint64_t seed = 0;
  unsigned min_selected = 0; // fewer selected arrays is Error(NoArraySymbols)
};

// Parses "unwritten", "all", "count:N" or a comma-separated list of globs.
QuantifyPlan::Select parse_selection(const std::string &text, QuantifyPlan &plan);

// Names of the declared array constants the plan selects, in declaration
// order.
std::vector<std::string> select_arrays(TermStore &store, const Script &s, const QuantifyPlan &plan);

// The quantified script. The logic drops its QF_ prefix; with no array
// selected the script is returned unchanged.
Script quantify_arrays(TermStore &store, const Script &s, const QuantifyPlan &plan);

} // namespace qsic
