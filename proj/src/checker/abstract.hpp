#pragma once

#include "qsic/checker.hpp"

namespace qsic {

// Exhaustive enumeration in which symbols whose domain cannot be enumerated
// (large arrays, uninterpreted functions) are left unknown and the formula is
// evaluated three-valued. Sat or Unsat only when the outcome is the same for
// every interpretation of the unknown symbols; unknown symbols are absent
// from the Sat model.
BruteResult brute_force_abstract(TermStore &store, Term phi, std::uint64_t budget);

} // namespace qsic
