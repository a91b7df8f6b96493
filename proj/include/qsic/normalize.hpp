#pragma once

// Pipeline stages around SIC inference: prenexing, skolemization at block
// heads, rewriting, and let-sharing.

#include "qsic/term.hpp"

#include <string>
#include <vector>

namespace qsic {

struct QuantBlock {
  Op kind; // Forall or Exists
  std::vector<Term> vars;
};

struct PrenexForm {
  std::vector<QuantBlock> blocks; // adjacent blocks alternate kinds
  Term matrix;                    // quantifier-free (lets allowed)
};

// Prenex normal form. Quantifiers may appear under not, and, or, => and
// under let bodies; anywhere else is an unsupported-structure error. Bound
// variables are renamed apart when needed. Existential blocks are pulled out
// ahead of universal ones whenever both are available, which keeps skolem
// symbols constant for as long as possible.
PrenexForm prenex(TermStore &store, Term t);

// Replaces a leading existential block by fresh constants named
// "qsic!sk!<var>". The new constants are declared in store.symbols() and
// reported through skolems (constant, original variable). No-op when the
// first block is universal.
struct Skolem {
  Term constant;
  Term var;
};
PrenexForm skolemize_head(TermStore &store, const PrenexForm &pf, std::vector<Skolem> *skolems);

// Equivalence-preserving bottom-up rewriting to a fixpoint, with a rewrite
// budget of 10 * size(t) rule applications.
Term simplify(TermStore &store, Term t);

// Binds every non-leaf subterm occurring at least threshold times as an
// argument (multiplicity counted, so u in (f u u) occurs twice) to a fresh
// "qsic!t!N" let name. Binder bodies are shared separately.
Term share_subterms(TermStore &store, Term t, unsigned threshold = 2);

} // namespace qsic
