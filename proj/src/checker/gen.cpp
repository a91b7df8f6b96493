#include "qsic/checker.hpp"

#include "qsic/term_util.hpp"

#include <array>

namespace qsic {

namespace {

class Gen {
public:
  Gen(TermStore &s, const GenOptions &o, std::mt19937_64 &rng) : s_(s), o_(o), rng_(rng) {
    w_ = 1 + pick(o.max_width);
    iw_ = 1 + pick(o.max_index_width);
    bv_ = s.bv_sort(w_);
    ix_ = s.bv_sort(iw_);
    arr_ = s.array_sort(ix_, bv_);
  }

  Term formula() { return boolean(o_.max_depth); }

  Generated finish(Term phi) {
    Generated g;
    g.phi = phi;
    // Only the variables that actually occur, in a stable order.
    for (Term v : free_vars(s_, phi)) {
      const std::string_view n = s_.name(v);
      (n == "x" || n == "y" || n == "q" || n == "t" ? g.targets : g.others).push_back(v);
    }
    return g;
  }

private:
  unsigned pick(unsigned n) { return static_cast<unsigned>(rng_() % n); }
  bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }

  Term var(const char *name, Sort sort) {
    if (!s_.symbols().declared(name))
      s_.symbols().declare(name, FunSig{{}, sort});
    return s_.mk_var(name, sort);
  }

  Term leaf(Sort sort) {
    const bool target = chance(o_.target_leaf);
    if (s_.is_bool(sort)) {
      if (target)
        return var("q", sort);
      return pick(3) ? var("p", sort) : s_.mk_bool(pick(2));
    }
    if (s_.is_array(sort)) {
      if (target)
        return var("t", sort);
      return pick(3) ? var("m", sort) : s_.mk_const_array(sort, bv_leaf_const(w_));
    }
    const unsigned w = s_.width(sort);
    if (w == w_ && (w != iw_ || pick(2))) {
      if (target)
        return var("x", sort);
      switch (pick(4)) {
      case 0: return var("a", sort);
      case 1: return var("b", sort);
      default: return bv_leaf_const(w);
      }
    }
    if (target)
      return var("y", sort);
    return pick(2) ? var("c", sort) : bv_leaf_const(w);
  }

  // Constants lean towards 0 and all-ones so absorbing elements show up.
  Term bv_leaf_const(unsigned w) {
    const std::uint64_t mask = (1ULL << w) - 1;
    switch (pick(4)) {
    case 0: return s_.mk_bv(0, w);
    case 1: return s_.mk_bv(mask, w);
    default: return s_.mk_bv(rng_() & mask, w);
    }
  }

  Term boolean(unsigned d) {
    if (d == 0 || chance(0.15))
      return leaf(s_.bool_sort());
    const unsigned k = d - 1;
    switch (pick(12)) {
    case 0: return s_.mk(Op::Not, {boolean(k)});
    case 1: return s_.mk(Op::And, {boolean(k), boolean(k)});
    case 2: return s_.mk(Op::Or, {boolean(k), boolean(k)});
    case 3: return s_.mk(Op::Implies, {boolean(k), boolean(k)});
    case 4: return s_.mk(Op::Xor, {boolean(k), boolean(k)});
    case 5: return s_.mk(Op::Ite, {boolean(k), boolean(k), boolean(k)});
    case 6: case 7: return s_.mk(Op::Eq, {bv(w_, k), bv(w_, k)});
    case 8: return s_.mk(Op::Eq, {bv(iw_, k), bv(iw_, k)});
    case 9: return s_.mk(Op::BvUlt, {bv(w_, k), bv(w_, k)});
    case 10: return s_.mk(Op::BvSle, {bv(w_, k), bv(w_, k)});
    default:
      if (o_.arrays && chance(0.3))
        return s_.mk(Op::Eq, {array(k), array(k)});
      return s_.mk(Op::Eq, {bv(w_, k), bv(w_, k)});
    }
  }

  Term bv(unsigned w, unsigned d) {
    const Sort sort = s_.bv_sort(w);
    if (d == 0 || chance(0.15))
      return leaf(sort);
    const unsigned k = d - 1;
    auto bin = [&](Op op) { return s_.mk(op, {bv(w, k), bv(w, k)}); };
    switch (pick(16)) {
    case 0: return bin(Op::BvAnd);
    case 1: return bin(Op::BvOr);
    case 2: case 3: return bin(Op::BvMul);
    case 4: return bin(Op::BvShl);
    case 5: return bin(Op::BvAdd);
    case 6: return bin(Op::BvSub);
    case 7: return bin(Op::BvLshr);
    case 8: return bin(Op::BvXor);
    case 9: return s_.mk(Op::BvNot, {bv(w, k)});
    case 10: return s_.mk(Op::BvNeg, {bv(w, k)});
    case 11: return bin(pick(2) ? Op::BvUdiv : Op::BvUrem);
    case 12: return s_.mk(Op::Ite, {boolean(k), bv(w, k), bv(w, k)});
    case 13: {
      // resize from the other width
      const unsigned from = w == w_ ? iw_ : w_;
      if (from == w)
        return bin(Op::BvAdd);
      const Term t = bv(from, k);
      if (from < w) {
        const unsigned p[] = {w - from};
        const Term kid[] = {t};
        return s_.mk(Op::ZeroExtend, kid, p);
      }
      const unsigned p[] = {w - 1, 0};
      const Term kid[] = {t};
      return s_.mk(Op::Extract, kid, p);
    }
    default:
      if (o_.arrays && w == w_)
        return s_.mk(Op::Select, {array(k), bv(iw_, k)});
      return bin(Op::BvAdd);
    }
  }

  Term array(unsigned d) {
    if (d == 0 || chance(0.25))
      return leaf(arr_);
    const unsigned k = d - 1;
    if (pick(4) == 0)
      return s_.mk(Op::Ite, {boolean(k), array(k), array(k)});
    return s_.mk(Op::Store, {array(k), bv(iw_, k), bv(w_, k)});
  }

  TermStore &s_;
  const GenOptions &o_;
  std::mt19937_64 &rng_;
  unsigned w_, iw_;
  Sort bv_, ix_, arr_;
};

} // namespace

Generated random_formula(TermStore &s, const GenOptions &opts, std::mt19937_64 &rng) {
  Gen g(s, opts, rng);
  return g.finish(g.formula());
}

Script quantified_script(TermStore &s, const Generated &g) {
  Script sc;
  sc.logic = "ABV";
  for (Term v : g.others)
    sc.decls.push_back({std::string(s.name(v)), FunSig{{}, s.sort(v)}});
  Term body = g.phi;
  if (!g.targets.empty()) {
    // Bound variables must not clash with declarations; targets are only
    // declared by the generator, so drop those declarations first.
    for (Term v : g.targets)
      s.symbols().undeclare(std::string(s.name(v)));
    body = s.mk_quant(Op::Forall, g.targets, g.phi);
  }
  sc.assertions.push_back({body, {}});
  sc.commands = {"check-sat"};
  return sc;
}

} // namespace qsic
