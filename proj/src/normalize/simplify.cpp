#include "qsic/bv.hpp"
#include "qsic/normalize.hpp"
#include "qsic/term_util.hpp"

#include <algorithm>
#include <limits>

namespace qsic {

namespace {

bool is_binder(Op op) { return op == Op::Let || is_quantifier(op); }

class Simplifier {
public:
  Simplifier(TermStore &s, std::uint64_t budget) : s_(s), budget_(budget) {}

  Term run(Term root) {
    struct Entry {
      Term t;
      int state = 0;
      Term result; // state 2: the rewritten term whose value t takes
    };
    std::vector<Entry> st{{root, 0, {}}};
    std::vector<Term> kids;
    while (!st.empty()) {
      Entry &e = st.back();
      if (memo_.count(e.t)) {
        st.pop_back();
        continue;
      }
      if (e.state == 0) {
        if (is_binder(s_.op(e.t))) {
          const Term t = e.t;
          st.pop_back();
          memo_[t] = binder(t);
          continue;
        }
        e.state = 1;
        const Term t = e.t;
        for (Term k : s_.kids(t))
          if (!memo_.count(k))
            st.push_back({k, 0, {}}); // invalidates e
        continue;
      }
      if (e.state == 1) {
        kids.clear();
        for (Term k : s_.kids(e.t))
          kids.push_back(memo_.at(k));
        const Term n = s_.rebuild(e.t, kids);
        const Term r = budget_ > 0 ? rewrite(n) : n;
        if (r == n) {
          memo_[n] = n;
          memo_[e.t] = n;
          st.pop_back();
          continue;
        }
        --budget_;
        if (auto it = memo_.find(r); it != memo_.end()) {
          memo_[e.t] = it->second;
          if (n != e.t)
            memo_[n] = it->second;
          st.pop_back();
          continue;
        }
        e.state = 2;
        e.result = r;
        st.push_back({r, 0, {}});
        continue;
      }
      const Term v = memo_.at(e.result);
      memo_[e.t] = v;
      st.pop_back();
    }
    return memo_.at(root);
  }

private:
  Term binder(Term t) {
    auto kids = s_.kids(t);
    std::vector<Term> out(kids.begin(), kids.end());
    if (s_.op(t) == Op::Let)
      for (std::size_t i = 1; i + 1 < out.size(); i += 2)
        out[i] = run(out[i]);
    out.back() = run(out.back());
    return s_.rebuild(t, out);
  }

  Term bv(std::uint64_t v, Term like) { return s_.mk_bv(v, s_.width(s_.sort(like))); }
  bool is_bv_val(Term t, std::uint64_t v) const {
    return s_.is_const(t) && s_.is_bv(s_.sort(t)) && s_.value(t) == v;
  }
  bool is_zero(Term t) const { return is_bv_val(t, 0); }
  bool is_ones(Term t) const {
    return s_.is_const(t) && s_.is_bv(s_.sort(t)) &&
           s_.value(t) == bv::mask(s_.width(s_.sort(t)));
  }
  bool is_one(Term t) const { return is_bv_val(t, 1); }
  bool is_not_of(Term a, Term b) const {
    return (s_.op(a) == Op::Not && s_.kid(a, 0) == b) || (s_.op(b) == Op::Not && s_.kid(b, 0) == a);
  }
  Term mk_not(Term a) {
    if (s_.is_true(a))
      return s_.mk_false();
    if (s_.is_false(a))
      return s_.mk_true();
    if (s_.op(a) == Op::Not)
      return s_.kid(a, 0);
    return s_.mk(Op::Not, {a});
  }

  Term nary(Op op, std::span<const Term> args) {
    const Term absorb = op == Op::And ? s_.mk_false() : s_.mk_true();
    const Term unit = op == Op::And ? s_.mk_true() : s_.mk_false();
    std::vector<Term> out;
    TermSet seen;
    bool changed = false;
    auto add = [&](Term k) {
      if (k == unit || !seen.insert(k).second) {
        changed = true;
        return;
      }
      out.push_back(k);
    };
    for (Term k : args) {
      if (k == absorb)
        return absorb;
      if (s_.op(k) == op) {
        changed = true;
        for (Term kk : s_.kids(k))
          add(kk);
      } else {
        add(k);
      }
    }
    for (Term k : out)
      if (s_.op(k) == Op::Not && seen.count(s_.kid(k, 0)))
        return absorb;
    if (out.empty())
      return unit;
    if (out.size() == 1)
      return out[0];
    if (!changed)
      return Term{};
    return s_.mk(op, out);
  }

  Term fold_bv(Term n) {
    auto kids = s_.kids(n);
    std::vector<std::uint64_t> vals;
    std::vector<unsigned> widths;
    for (Term k : kids) {
      if (!s_.is_const(k) || !s_.is_bv(s_.sort(k)))
        return Term{};
      vals.push_back(s_.value(k));
      widths.push_back(s_.width(s_.sort(k)));
    }
    const Sort rs = s_.sort(n);
    const unsigned rw = s_.is_bv(rs) ? s_.width(rs) : 1;
    const std::uint64_t v = bv::apply(s_.op(n), vals, widths, s_.params(n), rw);
    return s_.is_bool(rs) ? s_.mk_bool(v != 0) : s_.mk_bv(v, rw);
  }

  // One rewrite step at the root of n (whose children are simplified).
  // Returns n when no rule applies.
  Term rewrite(Term n) {
    const Op op = s_.op(n);
    auto k = s_.kids(n);
    switch (op) {
    case Op::Not: {
      if (s_.is_const(k[0]) || s_.op(k[0]) == Op::Not)
        return mk_not(k[0]);
      return n;
    }
    case Op::And:
    case Op::Or: {
      Term r = nary(op, k);
      return r ? r : n;
    }
    case Op::Implies: {
      if (s_.is_false(k[0]) || s_.is_true(k[1]) || k[0] == k[1])
        return s_.mk_true();
      if (s_.is_true(k[0]))
        return k[1];
      if (s_.is_false(k[1]))
        return mk_not(k[0]);
      return n;
    }
    case Op::Xor: {
      if (k[0] == k[1])
        return s_.mk_false();
      if (is_not_of(k[0], k[1]))
        return s_.mk_true();
      for (int i = 0; i < 2; ++i) {
        if (s_.is_false(k[i]))
          return k[1 - i];
        if (s_.is_true(k[i]))
          return mk_not(k[1 - i]);
      }
      return n;
    }
    case Op::Eq: {
      if (k[0] == k[1])
        return s_.mk_true();
      if (s_.is_const(k[0]) && s_.is_const(k[1]))
        return s_.mk_false(); // distinct literals of one sort
      if (s_.is_bool(s_.sort(k[0]))) {
        for (int i = 0; i < 2; ++i) {
          if (s_.is_true(k[i]))
            return k[1 - i];
          if (s_.is_false(k[i]))
            return mk_not(k[1 - i]);
        }
        if (is_not_of(k[0], k[1]))
          return s_.mk_false();
      }
      if (s_.is_const(k[0]))
        return s_.mk(Op::Eq, {k[1], k[0]});
      return n;
    }
    case Op::Distinct: {
      if (k.size() == 2)
        return mk_not(s_.mk(Op::Eq, {k[0], k[1]}));
      TermSet seen;
      bool all_const = true;
      for (Term a : k) {
        if (!seen.insert(a).second)
          return s_.mk_false();
        all_const = all_const && s_.is_const(a);
      }
      return all_const ? s_.mk_true() : n;
    }
    case Op::Ite: {
      const Term c = k[0], a = k[1], b = k[2];
      if (s_.is_true(c))
        return a;
      if (s_.is_false(c))
        return b;
      if (a == b)
        return a;
      if (s_.op(c) == Op::Not)
        return s_.mk(Op::Ite, {s_.kid(c, 0), b, a});
      if (s_.is_bool(s_.sort(a))) {
        if (a == c || s_.is_true(a))
          return s_.mk(Op::Or, {c, b});
        if (s_.is_false(a))
          return s_.mk(Op::And, {mk_not(c), b});
        if (b == c || s_.is_false(b))
          return s_.mk(Op::And, {c, a});
        if (s_.is_true(b))
          return s_.mk(Op::Or, {mk_not(c), a});
      }
      // ite(c, ite(c, x, y), z) and ite(c, x, ite(c, y, z))
      if (s_.op(a) == Op::Ite && s_.kid(a, 0) == c)
        return s_.mk(Op::Ite, {c, s_.kid(a, 1), b});
      if (s_.op(b) == Op::Ite && s_.kid(b, 0) == c)
        return s_.mk(Op::Ite, {c, a, s_.kid(b, 2)});
      return n;
    }
    case Op::Select: {
      const Term arr = k[0], j = k[1];
      if (s_.op(arr) == Op::ConstArray)
        return s_.kid(arr, 0);
      if (s_.op(arr) == Op::Store) {
        const Term i = s_.kid(arr, 1);
        if (i == j)
          return s_.kid(arr, 2);
        if (s_.is_const(i) && s_.is_const(j))
          return s_.mk(Op::Select, {s_.kid(arr, 0), j});
      }
      return n;
    }
    case Op::Store: {
      const Term arr = k[0], i = k[1], e = k[2];
      if (s_.op(arr) == Op::Store && s_.kid(arr, 1) == i)
        return s_.mk(Op::Store, {s_.kid(arr, 0), i, e});
      if (s_.op(e) == Op::Select && s_.kid(e, 0) == arr && s_.kid(e, 1) == i)
        return arr;
      if (s_.op(arr) == Op::ConstArray && s_.kid(arr, 0) == e)
        return arr;
      return n;
    }
    default:
      break;
    }

    if (!bv::is_bv_function(op))
      return n;
    if (Term folded = fold_bv(n))
      return folded;

    switch (op) {
    case Op::BvNot:
    case Op::BvNeg:
      if (s_.op(k[0]) == op)
        return s_.kid(k[0], 0);
      return n;
    case Op::BvAdd:
      if (is_zero(k[0]))
        return k[1];
      if (is_zero(k[1]))
        return k[0];
      if (s_.is_const(k[0]))
        return s_.mk(Op::BvAdd, {k[1], k[0]});
      return n;
    case Op::BvSub:
      if (k[0] == k[1])
        return bv(0, n);
      if (is_zero(k[1]))
        return k[0];
      if (is_zero(k[0]))
        return s_.mk(Op::BvNeg, {k[1]});
      return n;
    case Op::BvMul:
      if (is_zero(k[0]) || is_zero(k[1]))
        return bv(0, n);
      if (is_one(k[0]))
        return k[1];
      if (is_one(k[1]))
        return k[0];
      if (s_.is_const(k[0]))
        return s_.mk(Op::BvMul, {k[1], k[0]});
      return n;
    case Op::BvAnd:
      if (is_zero(k[0]) || is_zero(k[1]))
        return bv(0, n);
      if (is_ones(k[0]) || k[0] == k[1])
        return k[1];
      if (is_ones(k[1]))
        return k[0];
      if (s_.is_const(k[0]))
        return s_.mk(Op::BvAnd, {k[1], k[0]});
      return n;
    case Op::BvOr:
      if (is_ones(k[0]) || is_ones(k[1]))
        return bv(bv::mask(s_.width(s_.sort(n))), n);
      if (is_zero(k[0]) || k[0] == k[1])
        return k[1];
      if (is_zero(k[1]))
        return k[0];
      if (s_.is_const(k[0]))
        return s_.mk(Op::BvOr, {k[1], k[0]});
      return n;
    case Op::BvXor:
      if (k[0] == k[1])
        return bv(0, n);
      if (is_zero(k[0]))
        return k[1];
      if (is_zero(k[1]))
        return k[0];
      return n;
    case Op::BvShl:
    case Op::BvLshr:
      if (is_zero(k[1]))
        return k[0];
      if (is_zero(k[0]))
        return k[0];
      if (s_.is_const(k[1]) && s_.value(k[1]) >= s_.width(s_.sort(n)))
        return bv(0, n);
      return n;
    case Op::BvAshr:
      if (is_zero(k[1]) || is_zero(k[0]))
        return k[0];
      return n;
    case Op::BvUdiv:
    case Op::BvSdiv:
      if (is_one(k[1]))
        return k[0];
      return n;
    case Op::BvUrem:
    case Op::BvSrem:
    case Op::BvSmod:
      if (is_one(k[1]))
        return bv(0, n);
      return n;
    case Op::BvComp:
      if (k[0] == k[1])
        return s_.mk_bv(1, 1);
      return n;
    case Op::BvUle:
    case Op::BvUge:
    case Op::BvSle:
    case Op::BvSge:
      if (k[0] == k[1])
        return s_.mk_true();
      if ((op == Op::BvUle && (is_zero(k[0]) || is_ones(k[1]))) ||
          (op == Op::BvUge && (is_zero(k[1]) || is_ones(k[0]))))
        return s_.mk_true();
      return n;
    case Op::BvUlt:
    case Op::BvUgt:
    case Op::BvSlt:
    case Op::BvSgt:
      if (k[0] == k[1])
        return s_.mk_false();
      if ((op == Op::BvUlt && (is_zero(k[1]) || is_ones(k[0]))) ||
          (op == Op::BvUgt && (is_zero(k[0]) || is_ones(k[1]))))
        return s_.mk_false();
      return n;
    case Op::Extract:
      if (s_.param(n, 1) == 0 && s_.param(n, 0) + 1 == s_.width(s_.sort(k[0])))
        return k[0];
      return n;
    case Op::ZeroExtend:
    case Op::SignExtend:
      if (s_.param(n, 0) == 0)
        return k[0];
      return n;
    case Op::RotateLeft:
    case Op::RotateRight:
      if (s_.param(n, 0) % s_.width(s_.sort(n)) == 0)
        return k[0];
      return n;
    case Op::Repeat:
      if (s_.param(n, 0) == 1)
        return k[0];
      return n;
    default:
      return n;
    }
  }

  TermStore &s_;
  std::uint64_t budget_;
  TermMap<Term> memo_;
};

} // namespace

Term simplify(TermStore &store, Term t) {
  const std::uint64_t sz = size(store, t);
  const std::uint64_t budget =
      sz > std::numeric_limits<std::uint64_t>::max() / 10 ? std::numeric_limits<std::uint64_t>::max()
                                                          : 10 * sz;
  return Simplifier(store, budget).run(t);
}

} // namespace qsic
