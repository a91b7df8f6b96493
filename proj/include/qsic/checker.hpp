#pragma once

// Brute-force oracles over finite universes: independence (SIC/WIC) checks,
// lifted-model checks, exhaustive solving, and a seeded random ABV formula
// generator.

#include "qsic/model.hpp"
#include "qsic/smtlib.hpp"
#include "qsic/term.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace qsic {

struct Universe {
  // A side is enumerated exactly when its joint domain has at most this many
  // valuations; check_sic enumerates non-target x target pairs exactly when
  // the product is at most pair_budget.
  std::uint64_t target_budget = 1u << 12;
  std::uint64_t pair_budget = 1u << 18;
  // Arrays are enumerable when |dom(index)| * log2|dom(elem)| <= this.
  unsigned array_content_bits = 16;
  // Sample counts when a side is not enumerated.
  unsigned non_target_samples = 256;
  unsigned target_samples = 64;
  std::uint64_t seed = 1;
};

struct CheckResult {
  bool ok = true;
  bool sampled = false; // some side was sampled rather than enumerated
  std::uint64_t evaluations = 0;
  // On failure: the non-target valuation (functions included) and the
  // offending target valuations.
  Model witness;
  std::vector<Model> targets;
  std::string detail;
};

// Def. of a SIC for a term: for every non-target valuation under which psi
// holds (for some target valuation), phi takes one value across all target
// valuations. phi may have any sort.
CheckResult check_sic(TermStore &store, Term phi, Term psi, const TermSet &targets,
                      const Universe &u = {});

// pi is a WIC iff it agrees everywhere with "phi is independent of the
// targets at this non-target valuation".
CheckResult check_wic(TermStore &store, Term phi, Term pi, const TermSet &targets,
                      const Universe &u = {});

// The model lifted to the original formula: existential variables with a
// value in m are fixed to it, every universal variable is enumerated (or
// sampled), and the matrix must hold throughout.
CheckResult check_lifted_model(TermStore &store, Term original, const Model &m,
                               const Universe &u = {});

enum class BruteVerdict { Sat, Unsat, Unknown };
struct BruteResult {
  BruteVerdict verdict = BruteVerdict::Unknown;
  Model model;
  std::uint64_t evaluations = 0;
};
// Decides a closed-over-free-symbols formula by enumerating the free
// constants (quantifiers are evaluated by enumeration too). Unknown when the
// free domain exceeds budget or a quantified domain is too large. Uninterpreted
// functions are not supported (Unknown).
BruteResult brute_force_solve(TermStore &store, Term phi, std::uint64_t budget = 1u << 22);

// Random values and valuations.
Value random_value(TermStore &store, Sort sort, std::mt19937_64 &rng);
FunValue random_function(TermStore &store, const FunSig &sig, std::mt19937_64 &rng);

// Ground term for a value (Bool, BitVec, or array over those).
Term value_term(TermStore &store, const Value &v);

// Narrows every bitvector sort wider than max_width to max_width so that
// enumeration becomes feasible: constants keep their low bits and
// width-changing operators are adjusted to stay well sorted. The result is a
// different formula, meant for checking at small widths.
Term rescale_widths(TermStore &store, Term t, unsigned max_width);
// Same for a script; the declarations in store are updated too.
Script rescale_script(TermStore &store, const Script &s, unsigned max_width);

struct GenOptions {
  unsigned max_depth = 6;
  unsigned max_width = 4;       // bitvector widths are drawn from 1..max_width
  unsigned max_index_width = 3; // array index widths from 1..max_index_width
  double target_leaf = 0.3;     // chance that a variable leaf is a target
  bool arrays = true;
};

struct Generated {
  Term phi;                 // quantifier-free Bool matrix
  std::vector<Term> targets;
  std::vector<Term> others; // non-target constants
};

// Declares the variables it uses in store (names a b c p m for non-targets,
// x y q t for targets); use a fresh store per formula.
Generated random_formula(TermStore &store, const GenOptions &opts, std::mt19937_64 &rng);

// (assert (forall (targets) phi)) over declarations of the other symbols.
Script quantified_script(TermStore &store, const Generated &g);

} // namespace qsic
