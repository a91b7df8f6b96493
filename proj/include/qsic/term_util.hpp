#pragma once

#include "qsic/term.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace qsic {

// Visits every node reachable from roots exactly once, children before
// parents. Iterative, so arbitrarily deep terms are fine. Binder nodes are
// treated like any other node (their bound variables are children).
template <class Visit>
void post_order(const TermStore &store, std::span<const Term> roots, Visit &&visit) {
  std::vector<std::uint8_t> state(store.num_nodes(), 0); // 0 new, 1 open, 2 done
  std::vector<Term> stack;
  for (Term root : roots) {
    if (state[root.id] == 2)
      continue;
    stack.push_back(root);
    while (!stack.empty()) {
      Term t = stack.back();
      if (state[t.id] == 0) {
        state[t.id] = 1;
        auto kids = store.kids(t);
        for (auto it = kids.rbegin(); it != kids.rend(); ++it)
          if (state[it->id] == 0)
            stack.push_back(*it);
      } else {
        stack.pop_back();
        if (state[t.id] == 1) {
          state[t.id] = 2;
          visit(t);
        }
      }
    }
  }
}

template <class Visit> void post_order(const TermStore &store, Term root, Visit &&visit) {
  post_order(store, std::span<const Term>(&root, 1), std::forward<Visit>(visit));
}

// Term size: 1 for leaves, 1 + sum of argument sizes for applications,
// counted on the tree reading of the DAG (saturating at UINT64_MAX).
// Let: every bound definition is counted once plus the size of the body,
// where each reference to a binder is a leaf of size 1. Quantifier:
// 1 + size(body).
std::uint64_t size(const TermStore &store, Term t);

// Number of distinct nodes reachable from t.
std::size_t dag_size(const TermStore &store, Term t);

// Free variables (declared constants included), in first-occurrence order.
std::vector<Term> free_vars(const TermStore &store, Term t);

bool has_quantifier(const TermStore &store, Term t);
bool has_let(const TermStore &store, Term t);

// True if any variable of vars occurs free in t.
bool mentions(const TermStore &store, Term t, const TermSet &vars);

// Capture-avoiding simultaneous substitution of free variables, keyed by
// variable name. Throws Error(Sort) if a replacement's sort differs from the
// variable's.
Term substitute(TermStore &store, Term t, const std::unordered_map<std::string, Term> &map);

// Same, keyed by variable term.
Term substitute(TermStore &store, Term t, const TermMap<Term> &map);

// Inlines every let binding. Cheap on the DAG: definitions are shared.
Term expand_lets(TermStore &store, Term t);

} // namespace qsic
