#pragma once

// Ground evaluation of terms under a model (standard ABV semantics).

#include "qsic/model.hpp"
#include "qsic/term.hpp"

#include <optional>
#include <span>
#include <vector>

namespace qsic {

// All values of sort when there are at most max_values of them, else nullopt.
// Arrays are enumerated as functions from the index domain.
std::optional<std::vector<Value>> enumerate_domain(TermStore &store, Sort sort,
                                                   std::uint64_t max_values);

// A term compiled to a flat tape. Free symbols are the inputs: constants are
// read positionally from run()'s argument in the order of inputs(), function
// symbols from the model passed at construction or to set_functions().
// Quantifiers are evaluated by enumerating bound domains, which must have at
// most max_quant_values elements per block (otherwise run() throws
// Error(UnsupportedStructure)).
class Evaluator {
public:
  Evaluator(TermStore &store, Term root, std::uint64_t max_quant_values = 1u << 16);
  ~Evaluator();
  Evaluator(Evaluator &&) noexcept;

  const std::vector<Term> &inputs() const { return inputs_; }
  void set_functions(const Model *m) { funs_ = m; }

  Value run(std::span<const Value> input_values) const;
  // Looks every input up in m (Error(IncompleteModel) if one is missing).
  Value run(const Model &m) const;

  struct Tape;

private:
  Value run_impl(std::span<const Value> input_values, const Model *funs) const;

  TermStore &s_;
  std::vector<Term> inputs_;
  std::unique_ptr<Tape> tape_;
  const Model *funs_ = nullptr;
};

Value eval(TermStore &store, Term t, const Model &m);

} // namespace qsic
