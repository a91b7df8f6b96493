#pragma once

// The preprocessing pipeline: prenex, skolemize block heads, infer the SIC,
// simplify, and emit a quantifier-free script.

#include "qsic/normalize.hpp"
#include "qsic/sic.hpp"
#include "qsic/smtlib.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qsic {

struct PreprocessOptions {
  bool simplify = true;
  unsigned share_threshold = 2;
  // Target variable names. Empty means every universally quantified
  // variable; when given, it must include all of them and may add declared
  // constants.
  std::vector<std::string> targets;
  SicOptions sic;
  const AbsorptionRegistry *registry = nullptr; // builtin() when null
};

struct SkolemLoop {
  Term matrix;                     // quantifier-free
  std::vector<Term> eliminated;    // universal variables, now free constants
  std::vector<Skolem> skolems;     // existential variables, now free constants
  unsigned rounds = 0;
};

// Alternates skolemize_head and dropping the next universal block until no
// block remains. Every existential becomes a constant because each universal
// block ahead of it is eliminated rather than kept as a dependency.
SkolemLoop skolemize_iteratively(TermStore &store, const PrenexForm &pf);

struct Preprocessed {
  Term matrix;       // after skolemization (and simplification)
  Term raw_sic;      // as inferred
  Term sic;          // simplified (equals raw_sic when simplification is off)
  bool is_wic = false;
  bool trivial_wic = false; // detect_trivial_wic fired
  TermSet targets;
  std::vector<Term> eliminated;
  std::vector<Skolem> skolems;
  std::vector<ShadowArray> shadows;
  SizeBound bound;
  unsigned rounds = 0;
  double taint_seconds = 0;    // SIC inference
  double simplify_seconds = 0; // both simplification passes
  Term output;                 // matrix /\ sic
};

// Conjoins the assertions and runs the pipeline. Throws Error.
Preprocessed preprocess(TermStore &store, const Script &input, const PreprocessOptions &opts = {});

// Quantifier-free script for out: original declarations plus eliminated
// variables, skolem constants and shadow arrays; logic QF_AUFBV when
// uninterpreted functions remain, otherwise QF_ABV. The SIC is asserted
// as its own assertion after the matrix.
Script output_script(TermStore &store, const Script &input, const Preprocessed &out);

} // namespace qsic
