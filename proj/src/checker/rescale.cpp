#include "qsic/checker.hpp"

#include "qsic/term_util.hpp"

namespace qsic {

namespace {

struct Rescaler {
  TermStore &s;
  unsigned max;
  TermMap<Term> done;

  Sort sort(Sort so) {
    switch (s.kind(so)) {
    case SortKind::BitVec:
      return s.width(so) > max ? s.bv_sort(max) : so;
    case SortKind::Array:
      return s.array_sort(sort(s.index_sort(so)), sort(s.element_sort(so)));
    default:
      return so;
    }
  }

  unsigned target(Term t) { return std::min(s.width(s.sort(t)), max); }

  Term low_bits(Term t, unsigned w) {
    const unsigned have = s.width(s.sort(t));
    if (have == w)
      return t;
    const unsigned p[] = {w - 1, 0};
    const Term k[] = {t};
    return s.mk(Op::Extract, k, p);
  }

  Term node(Term t, std::span<const Term> kids) {
    const Op op = s.op(t);
    switch (op) {
    case Op::Const:
      if (s.is_bv(s.sort(t)) && s.width(s.sort(t)) > max)
        return s.mk_bv(s.value(t) & ((1ULL << max) - 1), max);
      return t;
    case Op::Var:
      return s.mk_var(s.name(t), sort(s.sort(t)));
    case Op::ConstArray:
      return s.mk_const_array(sort(s.sort(t)), kids[0]);
    case Op::Extract: {
      const unsigned r = target(t), nw = s.width(s.sort(kids[0]));
      const unsigned lo = std::min(s.param(t, 1), nw - r);
      const unsigned p[] = {lo + r - 1, lo};
      return s.mk(Op::Extract, kids, p);
    }
    case Op::ZeroExtend:
    case Op::SignExtend: {
      const unsigned r = target(t), nw = s.width(s.sort(kids[0]));
      if (r == nw)
        return kids[0];
      const unsigned p[] = {r - nw};
      return s.mk(op, kids, p);
    }
    case Op::Concat:
      return low_bits(s.mk(Op::Concat, kids), target(t));
    case Op::Repeat: {
      const unsigned r = target(t), nw = s.width(s.sort(kids[0]));
      const unsigned p[] = {(r + nw - 1) / nw};
      return low_bits(s.mk(Op::Repeat, kids, p), r);
    }
    default:
      return s.rebuild(t, kids);
    }
  }

  Term run(Term root) {
    post_order(s, root, [&](Term t) {
      std::vector<Term> kids;
      for (Term k : s.kids(t))
        kids.push_back(done.at(k));
      done.emplace(t, node(t, kids));
    });
    return done.at(root);
  }
};

} // namespace

Term rescale_widths(TermStore &s, Term t, unsigned max_width) {
  if (max_width == 0)
    throw Error(ErrorKind::InvalidArgument, "width limit must be positive");
  return Rescaler{s, max_width, {}}.run(t);
}

Script rescale_script(TermStore &s, const Script &sc, unsigned max_width) {
  if (max_width == 0)
    throw Error(ErrorKind::InvalidArgument, "width limit must be positive");
  Rescaler r{s, max_width, {}};
  Script out = sc;
  for (Declaration &d : out.decls) {
    for (Sort &so : d.sig.domain)
      so = r.sort(so);
    d.sig.range = r.sort(d.sig.range);
    s.symbols().declare(d.name, d.sig);
  }
  for (Assertion &a : out.assertions)
    a.term = r.run(a.term);
  return out;
}

} // namespace qsic
