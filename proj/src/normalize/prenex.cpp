#include "qsic/normalize.hpp"
#include "qsic/term_util.hpp"

#include <algorithm>

namespace qsic {

namespace {

Op flip(Op q) { return q == Op::Forall ? Op::Exists : Op::Forall; }

class Prenexer {
public:
  explicit Prenexer(TermStore &s) : s_(s) {}

  PrenexForm run(Term t) {
    for (Term v : free_vars(s_, t))
      used_.insert(v);
    return go(t);
  }

private:
  PrenexForm go(Term t) {
    if (!has_quantifier(s_, t))
      return {{}, t};
    const Op op = s_.op(t);
    switch (op) {
    case Op::Forall:
    case Op::Exists: {
      std::vector<Term> vars;
      TermMap<Term> renaming;
      for (Term v : s_.bound_vars(t)) {
        if (used_.count(v)) {
          Term nv = s_.mk_var(s_.symbols().fresh(s_.name(v)), s_.sort(v));
          renaming.emplace(v, nv);
          v = nv;
        }
        used_.insert(v);
        vars.push_back(v);
      }
      Term body = renaming.empty() ? s_.body(t) : substitute(s_, s_.body(t), renaming);
      PrenexForm inner = go(body);
      PrenexForm out;
      out.blocks.push_back({op, std::move(vars)});
      for (auto &b : inner.blocks) {
        if (b.kind == out.blocks.back().kind)
          out.blocks.back().vars.insert(out.blocks.back().vars.end(), b.vars.begin(), b.vars.end());
        else
          out.blocks.push_back(std::move(b));
      }
      out.matrix = inner.matrix;
      return out;
    }
    case Op::Not: {
      PrenexForm inner = go(s_.kid(t, 0));
      for (auto &b : inner.blocks)
        b.kind = flip(b.kind);
      inner.matrix = s_.mk(Op::Not, {inner.matrix});
      return inner;
    }
    case Op::Implies: {
      Term lhs = s_.mk(Op::Not, {s_.kid(t, 0)});
      return combine(Op::Or, std::vector<Term>{lhs, s_.kid(t, 1)}, true);
    }
    case Op::And:
    case Op::Or: {
      auto kids = s_.kids(t);
      return combine(op, std::vector<Term>(kids.begin(), kids.end()), false);
    }
    case Op::Let:
      return go(expand_lets(s_, t));
    default:
      throw Error(ErrorKind::UnsupportedStructure,
                  "quantifier under '" + std::string(op_name(op)) +
                      "' is not supported (only not, and, or, => may contain quantifiers)");
    }
  }

  // Quantifiers over disjoint variables commute with and/or; merge the
  // children's prefixes greedily, existential blocks first.
  PrenexForm combine(Op op, const std::vector<Term> &kids, bool implies_form) {
    std::vector<PrenexForm> parts;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      if (implies_form && i == 0) {
        PrenexForm p = go(s_.kid(kids[0], 0));
        for (auto &b : p.blocks)
          b.kind = flip(b.kind);
        p.matrix = s_.mk(Op::Not, {p.matrix});
        parts.push_back(std::move(p));
      } else {
        parts.push_back(go(kids[i]));
      }
    }
    std::vector<std::size_t> pos(parts.size(), 0);
    PrenexForm out;
    for (;;) {
      bool any = false, exists = false;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (pos[i] < parts[i].blocks.size()) {
          any = true;
          exists = exists || parts[i].blocks[pos[i]].kind == Op::Exists;
        }
      }
      if (!any)
        break;
      const Op kind = exists ? Op::Exists : Op::Forall;
      QuantBlock block{kind, {}};
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (pos[i] < parts[i].blocks.size() && parts[i].blocks[pos[i]].kind == kind) {
          auto &vs = parts[i].blocks[pos[i]].vars;
          block.vars.insert(block.vars.end(), vs.begin(), vs.end());
          ++pos[i];
        }
      }
      if (!out.blocks.empty() && out.blocks.back().kind == kind)
        out.blocks.back().vars.insert(out.blocks.back().vars.end(), block.vars.begin(),
                                      block.vars.end());
      else
        out.blocks.push_back(std::move(block));
    }
    std::vector<Term> matrices;
    for (auto &p : parts)
      matrices.push_back(p.matrix);
    out.matrix = s_.mk(op, matrices);
    return out;
  }

  TermStore &s_;
  TermSet used_;
};

} // namespace

PrenexForm prenex(TermStore &store, Term t) {
  if (!store.is_bool(store.sort(t)))
    throw Error(ErrorKind::Sort, "sort mismatch: prenex needs a Bool term, got " +
                                     store.to_string(store.sort(t)));
  return Prenexer(store).run(t);
}

PrenexForm skolemize_head(TermStore &store, const PrenexForm &pf, std::vector<Skolem> *skolems) {
  if (pf.blocks.empty() || pf.blocks.front().kind != Op::Exists)
    return pf;
  TermMap<Term> sub;
  for (Term v : pf.blocks.front().vars) {
    const std::string name = store.symbols().fresh("qsic!sk!" + std::string(store.name(v)));
    store.symbols().declare(name, FunSig{{}, store.sort(v)});
    Term c = store.mk_var(name, store.sort(v));
    sub.emplace(v, c);
    if (skolems)
      skolems->push_back({c, v});
  }
  PrenexForm out;
  out.blocks.assign(pf.blocks.begin() + 1, pf.blocks.end());
  out.matrix = substitute(store, pf.matrix, sub);
  return out;
}

} // namespace qsic
