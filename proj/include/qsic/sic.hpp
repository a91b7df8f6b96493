#pragma once

// Taint-based inference of sufficient independence conditions (SIC).
//
// A SIC for a term t and a set of target variables is a formula psi such that
// in every interpretation satisfying psi, the value of t does not change when
// the targets are changed. psi may mention the targets syntactically (rules
// emit e.g. (= a false) for a subterm a), but only under a taint that makes
// that subterm target-independent, so psi's own truth value never depends on
// the targets either.

#include "qsic/term.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace qsic {

// <R, I_R>: whenever relation holds of the arguments at the support
// positions, f's result is fixed by those arguments alone.
//
// relation is an SMT-LIB Bool term over the placeholders $1..$arity. Three
// width-generic macros are available for bitvector arguments: (zeros $k),
// (ones $k) and (width $k), the last being the literal n of width n.
struct AbsorptionRule {
  std::string symbol; // SMT-LIB name ("bvmul", "or", ...) or a declared function
  unsigned arity = 0;
  std::vector<unsigned> support; // 1-based positions
  std::string relation;
};

class AbsorptionRegistry {
public:
  // Absorbing elements of and, or, =>, bvand, bvor, bvmul and the bvshl
  // shift-out rule.
  static AbsorptionRegistry builtin();
  // Rules from text: a sequence of (absorb <symbol> <arity> (<i> ...) <relation>).
  static AbsorptionRegistry parse(std::string_view text);

  // Throws Error(MalformedRule).
  void add(AbsorptionRule rule);
  // Adds the (absorb ...) rules of text.
  void add_text(std::string_view text);
  // For every arity n and position i, the rule <$i = element, {i}>. element
  // is a template in which $i stands for the absorbed position.
  void add_absorbing_element(std::string symbol, std::string element);

  std::vector<AbsorptionRule> rules(std::string_view symbol, unsigned arity) const;
  std::size_t size() const { return rules_.size() + elements_.size(); }

private:
  std::vector<AbsorptionRule> rules_;
  std::vector<std::pair<std::string, std::string>> elements_;
};

// Validates a rule without registering it. Throws Error(MalformedRule).
void validate_rule(const AbsorptionRule &rule);

struct SicResult {
  Term formula;
  bool is_wic = false;
};

enum class ShadowMode {
  // The shadow of a base array is the constant array of its taint.
  ConstArray,
  // The shadow is a declared Bool-element array qsic!shadow!<name>; each read
  // index j reaching the base gets the constraint (select shadow j) = taint.
  Declared,
};

struct SicOptions {
  bool memoize = true;
  // Fold boolean constants while building (taints of leaves are literal
  // true/false).
  bool fold = true;
  ShadowMode shadow = ShadowMode::ConstArray;
};

struct ShadowArray {
  Term original;
  Term shadow;
  std::vector<Term> read_indices;
};

class SicEngine {
public:
  SicEngine(TermStore &store, const AbsorptionRegistry &registry, TermSet targets,
            SicOptions opts = {});
  // The registry is referenced, not copied.
  SicEngine(TermStore &, AbsorptionRegistry &&, TermSet, SicOptions = {}) = delete;
  ~SicEngine();

  // SIC of a quantifier-free formula (lets are expanded first). In Declared
  // shadow mode the shadow constraints are conjoined. Throws
  // Error(UnsupportedStructure) on quantifiers.
  SicResult infer(Term t);
  // SIC of a subterm, without shadow constraints.
  Term infer_term(Term t);

  // Theory part for an application node, given its arguments' SICs.
  Term theory_sic(Term app, std::span<const Term> arg_sics);

  TermStore &store() { return s_; }
  const TermSet &targets() const { return targets_; }
  Term taint_of_var(Term v) const;
  const std::vector<ShadowArray> &shadows() const { return shadows_; }
  std::vector<Term> shadow_constraints();
  // Cached (term, SIC) pairs for every visited node, including the select
  // nodes introduced when unfolding store chains.
  std::vector<std::pair<Term, Term>> cached() const;

  // Largest shared size of a theory_sic skeleton for a symbol of the given
  // argument sorts, with argument and argument-SIC references counted as 1.
  std::uint64_t skeleton_size(Term app);

private:
  struct Impl;
  TermStore &s_;
  const AbsorptionRegistry &reg_;
  TermSet targets_;
  SicOptions opts_;
  std::vector<ShadowArray> shadows_;
  std::unique_ptr<Impl> impl_;
};

// (true, is_wic) when no target occurs free in t, otherwise nullopt.
std::optional<SicResult> detect_trivial_wic(const TermStore &store, Term t, const TermSet &targets);

// Shared size: every distinct non-leaf node outside refs counts 1 + its
// number of children, plus 1 for the root reference. This is the let-size of
// t with every non-leaf bound once and every node of refs as a let name.
std::uint64_t shared_size(const TermStore &store, Term t, const TermSet &refs = {});

// Size-bound data for one run: sic_size <= (K + N) * input_size.
struct SizeBound {
  std::uint64_t input_size = 0; // size of the matrix the SIC was computed for
  std::uint64_t sic_size = 0;   // shared_size of the raw SIC, matrix subterms as refs
  std::uint64_t k = 0;          // max skeleton size over the matrix nodes, plus glue
  std::uint64_t n = 0;          // max arity in the matrix
  bool holds() const { return sic_size <= (k + n) * input_size; }
};

SizeBound measure_size_bound(SicEngine &engine, Term matrix, Term raw_sic);

} // namespace qsic
