#include "qsic/term_util.hpp"

#include <algorithm>
#include <limits>

namespace qsic {

namespace {

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return a > std::numeric_limits<std::uint64_t>::max() - b ? std::numeric_limits<std::uint64_t>::max()
                                                           : a + b;
}

bool is_binder(Op op) { return op == Op::Let || is_quantifier(op); }

// Post-order walk that stops at binder nodes: they are handed to on_binder
// instead of being descended into.
template <class Leaf, class Binder, class Inner>
void walk_scope(const TermStore &store, Term root, TermSet &done, Leaf &&on_leaf,
                Binder &&on_binder, Inner &&on_inner) {
  std::vector<std::pair<Term, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [t, expanded] = stack.back();
    stack.pop_back();
    if (done.count(t))
      continue;
    const Op op = store.op(t);
    if (op == Op::Const || op == Op::Var) {
      done.insert(t);
      on_leaf(t);
      continue;
    }
    if (is_binder(op)) {
      done.insert(t);
      on_binder(t);
      continue;
    }
    if (expanded) {
      done.insert(t);
      on_inner(t);
      continue;
    }
    stack.emplace_back(t, true);
    for (Term k : store.kids(t))
      if (!done.count(k))
        stack.emplace_back(k, false);
  }
}

class FreeVarCollector {
public:
  explicit FreeVarCollector(const TermStore &store) : store_(store) {}

  void run(Term t, const TermSet &bound) {
    for (Term v : bound)
      ++bound_[v];
    collect(t);
  }

private:
  // bound_ counts enclosing binders per variable, so scopes nest without
  // copying.
  void collect(Term t) {
    TermSet done;
    walk_scope(
        store_, t, done,
        [&](Term leaf) {
          if (store_.is_var(leaf) && !bound_.count(leaf) && seen_.insert(leaf).second)
            out_.push_back(leaf);
        },
        [&](Term binder) {
          std::vector<Term> vars;
          if (store_.op(binder) == Op::Let) {
            auto kids = store_.kids(binder);
            for (std::size_t i = 0; i + 1 < kids.size(); i += 2) {
              collect(kids[i + 1]);
              vars.push_back(kids[i]);
            }
          } else {
            auto bv = store_.bound_vars(binder);
            vars.assign(bv.begin(), bv.end());
          }
          for (Term v : vars)
            ++bound_[v];
          collect(store_.body(binder));
          for (Term v : vars)
            if (--bound_[v] == 0)
              bound_.erase(v);
        },
        [](Term) {});
  }

public:
  std::vector<Term> take() { return std::move(out_); }

private:
  const TermStore &store_;
  TermMap<unsigned> bound_;
  TermSet seen_;
  std::vector<Term> out_;
};

class Substituter {
public:
  Substituter(TermStore &store, bool expand_lets) : store_(store), expand_(expand_lets) {}

  Term run(Term root, const TermMap<Term> &env) {
    if (env.empty() && !expand_)
      return root;
    TermMap<Term> memo;
    TermSet done;
    std::vector<Term> kids;
    walk_scope(
        store_, root, done,
        [&](Term leaf) {
          auto it = env.find(leaf);
          memo[leaf] = it == env.end() ? leaf : it->second;
        },
        [&](Term binder) { memo[binder] = binder_case(binder, env); },
        [&](Term t) {
          kids.clear();
          for (Term k : store_.kids(t))
            kids.push_back(memo.at(k));
          memo[t] = store_.rebuild(t, kids);
        });
    return memo.at(root);
  }

private:
  Term binder_case(Term t, const TermMap<Term> &env) {
    if (store_.op(t) == Op::Let && expand_) {
      TermMap<Term> inner = env;
      std::vector<std::pair<Term, Term>> level;
      while (store_.op(t) == Op::Let) {
        auto kids = store_.kids(t);
        // bindings are parallel: evaluate all before updating
        level.clear();
        for (std::size_t i = 0; i + 1 < kids.size(); i += 2)
          level.emplace_back(kids[i], run(kids[i + 1], inner));
        for (auto &[v, e] : level)
          inner[v] = e;
        t = store_.body(t);
      }
      return run(t, inner);
    }

    std::vector<Term> binders;
    std::vector<Term> new_kids;
    auto kids = store_.kids(t);
    if (store_.op(t) == Op::Let) {
      for (std::size_t i = 0; i + 1 < kids.size(); i += 2)
        binders.push_back(kids[i]);
    } else {
      auto bv = store_.bound_vars(t);
      binders.assign(bv.begin(), bv.end());
    }

    TermMap<Term> inner = env;
    for (Term v : binders)
      inner.erase(v);

    // rename binders that would capture a free variable of a replacement
    if (!inner.empty()) {
      TermSet captured;
      for (const auto &[var, repl] : inner)
        for (Term fv : free_vars(store_, repl))
          captured.insert(fv);
      for (Term &v : binders) {
        if (captured.count(v)) {
          Term renamed = store_.mk_var(store_.symbols().fresh(store_.name(v)), store_.sort(v));
          inner[v] = renamed;
          v = renamed;
        }
      }
    }

    if (store_.op(t) == Op::Let) {
      std::vector<std::pair<Term, Term>> bindings;
      for (std::size_t i = 0, b = 0; i + 1 < kids.size(); i += 2, ++b)
        bindings.emplace_back(binders[b], run(kids[i + 1], env));
      return store_.mk_let(bindings, run(store_.body(t), inner));
    }
    return store_.mk_quant(store_.op(t), binders, run(store_.body(t), inner));
  }

  TermStore &store_;
  bool expand_;
};

} // namespace

std::uint64_t size(const TermStore &store, Term t) {
  std::vector<std::uint64_t> sz(store.num_nodes(), 0);
  post_order(store, t, [&](Term n) {
    const Op op = store.op(n);
    auto kids = store.kids(n);
    std::uint64_t s = 0;
    if (op == Op::Const || op == Op::Var) {
      s = 1;
    } else if (op == Op::Let) {
      for (std::size_t i = 1; i + 1 < kids.size(); i += 2)
        s = sat_add(s, sz[kids[i].id]);
      s = sat_add(s, sz[kids.back().id]);
    } else if (is_quantifier(op)) {
      s = sat_add(1, sz[kids.back().id]);
    } else {
      s = 1;
      for (Term k : kids)
        s = sat_add(s, sz[k.id]);
    }
    sz[n.id] = s;
  });
  return sz[t.id];
}

std::size_t dag_size(const TermStore &store, Term t) {
  std::size_t n = 0;
  post_order(store, t, [&](Term) { ++n; });
  return n;
}

std::vector<Term> free_vars(const TermStore &store, Term t) {
  FreeVarCollector c(store);
  c.run(t, {});
  return c.take();
}

bool has_quantifier(const TermStore &store, Term t) {
  bool found = false;
  post_order(store, t, [&](Term n) { found = found || is_quantifier(store.op(n)); });
  return found;
}

bool has_let(const TermStore &store, Term t) {
  bool found = false;
  post_order(store, t, [&](Term n) { found = found || store.op(n) == Op::Let; });
  return found;
}

bool mentions(const TermStore &store, Term t, const TermSet &vars) {
  if (vars.empty())
    return false;
  for (Term v : free_vars(store, t))
    if (vars.count(v))
      return true;
  return false;
}

Term substitute(TermStore &store, Term t, const TermMap<Term> &map) {
  for (const auto &[var, repl] : map) {
    if (!store.is_var(var))
      throw Error(ErrorKind::InvalidArgument, "substitution key is not a variable");
    if (store.sort(var) != store.sort(repl))
      throw Error(ErrorKind::Sort, "sort mismatch: substituting '" + std::string(store.name(var)) +
                                       "' of sort " + store.to_string(store.sort(var)) +
                                       " with a term of sort " + store.to_string(store.sort(repl)));
  }
  return Substituter(store, false).run(t, map);
}

Term substitute(TermStore &store, Term t, const std::unordered_map<std::string, Term> &map) {
  if (map.empty())
    return t;
  // Resolve names against the free variables actually present in t.
  TermMap<Term> by_var;
  for (Term v : free_vars(store, t)) {
    auto it = map.find(std::string(store.name(v)));
    if (it != map.end())
      by_var.emplace(v, it->second);
  }
  return substitute(store, t, by_var);
}

Term expand_lets(TermStore &store, Term t) {
  if (!has_let(store, t))
    return t;
  return Substituter(store, true).run(t, {});
}

} // namespace qsic
