#include "abstract.hpp"

#include "qsic/bv.hpp"
#include "qsic/error.hpp"
#include "qsic/eval.hpp"
#include "qsic/term_util.hpp"

#include <map>
#include <memory>

namespace qsic {

namespace {

struct Arr;

// A scalar is known or not; an array is a default plus a write log, any part
// of which may be unknown.
struct AV {
  bool known = false;
  std::uint64_t bits = 0;
  std::shared_ptr<const Arr> arr;
};

struct Arr {
  AV def;
  std::vector<std::pair<AV, AV>> writes;
};

AV scalar(std::uint64_t v) { return {true, v, nullptr}; }

AV unknown(const TermStore &s, Sort sort) {
  if (!s.is_array(sort))
    return {};
  auto a = std::make_shared<Arr>();
  a->def = unknown(s, s.element_sort(sort));
  return {false, 0, a};
}

AV from_value(const Value &v) {
  if (!v.array)
    return scalar(v.bits);
  auto a = std::make_shared<Arr>();
  a->def = from_value(v.array->default_value);
  for (const auto &[k, e] : v.array->entries)
    a->writes.emplace_back(scalar(k), from_value(e));
  return {false, 0, a};
}

bool same(const AV &a, const AV &b) { return a.known && b.known && a.bits == b.bits; }

// Cell map of a fully known array over scalars, or nullopt.
std::optional<std::pair<std::uint64_t, std::map<std::uint64_t, std::uint64_t>>> concrete(const AV &a) {
  if (!a.arr || !a.arr->def.known)
    return std::nullopt;
  std::map<std::uint64_t, std::uint64_t> cells;
  for (const auto &[i, e] : a.arr->writes) {
    if (!i.known || !e.known)
      return std::nullopt;
    cells[i.bits] = e.bits;
  }
  return std::pair{a.arr->def.bits, std::move(cells)};
}

class Abstract {
public:
  Abstract(TermStore &s, std::uint64_t budget) : s_(s), budget_(budget) {}

  // Free symbols bound to values, or to unknown when absent.
  AV run(Term t, const TermMap<AV> &free) {
    free_ = &free;
    env_.clear();
    memo_.clear();
    return eval(t);
  }

private:
  using Env = std::vector<std::pair<Term, AV>>; // innermost last

  AV lookup(Term v) {
    for (auto it = env_.rbegin(); it != env_.rend(); ++it)
      if (it->first == v)
        return it->second;
    auto f = free_->find(v);
    return f != free_->end() ? f->second : unknown(s_, s_.sort(v));
  }

  AV eq(Term a, Term b) {
    if (a == b)
      return scalar(1);
    const AV x = eval(a), y = eval(b);
    if (!s_.is_array(s_.sort(a)))
      return x.known && y.known ? scalar(x.bits == y.bits) : AV{};
    auto cx = concrete(x), cy = concrete(y);
    if (!cx || !cy)
      return {};
    const Sort is = s_.index_sort(s_.sort(a));
    const std::uint64_t cells = s_.is_bool(is) ? 2 : std::uint64_t(1) << std::min(s_.width(is), 63u);
    auto get = [](const auto &c, std::uint64_t i) {
      auto it = c.second.find(i);
      return it == c.second.end() ? c.first : it->second;
    };
    std::map<std::uint64_t, bool> keys;
    for (const auto &[k, v] : cx->second)
      keys[k] = true;
    for (const auto &[k, v] : cy->second)
      keys[k] = true;
    for (const auto &[k, unused] : keys)
      if (get(*cx, k) != get(*cy, k))
        return scalar(0);
    // indices written in neither hold the defaults
    if (keys.size() < cells && cx->first != cy->first)
      return scalar(0);
    return scalar(1);
  }

  // Memoized for the current environment; binders clear the memo whenever
  // they change the environment.
  AV eval(Term t) {
    if (auto it = memo_.find(t); it != memo_.end())
      return it->second;
    AV r = compute(t);
    memo_.emplace(t, r);
    return r;
  }

  AV compute(Term t) {
    const Op op = s_.op(t);
    const auto kids = s_.kids(t);
    const Sort sort = s_.sort(t);
    const unsigned w = s_.is_bv(sort) ? s_.width(sort) : 0;
    switch (op) {
    case Op::Const: return scalar(s_.is_bool(sort) ? s_.is_true(t) : s_.value(t));
    case Op::Var: return lookup(t);
    case Op::Apply: return unknown(s_, sort);
    case Op::ConstArray: {
      auto a = std::make_shared<Arr>();
      a->def = eval(kids[0]);
      return {false, 0, a};
    }
    case Op::Let: {
      const std::size_t mark = env_.size();
      std::vector<std::pair<Term, AV>> bound;
      for (std::size_t i = 0; i + 1 < kids.size(); i += 2)
        bound.emplace_back(kids[i], eval(kids[i + 1]));
      for (auto &b : bound)
        env_.push_back(std::move(b));
      memo_.clear();
      AV r = eval(kids.back());
      env_.resize(mark);
      memo_.clear();
      return r;
    }
    case Op::Forall:
    case Op::Exists: return quantifier(t, op == Op::Forall);
    case Op::Not: {
      const AV a = eval(kids[0]);
      return a.known ? scalar(!a.bits) : AV{};
    }
    case Op::And:
    case Op::Or: {
      const std::uint64_t absorb = op == Op::Or;
      bool all = true;
      for (Term k : kids) {
        const AV a = eval(k);
        if (a.known && a.bits == absorb)
          return scalar(absorb);
        all = all && a.known;
      }
      return all ? scalar(!absorb) : AV{};
    }
    case Op::Implies: {
      const AV a = eval(kids[0]);
      if (a.known && !a.bits)
        return scalar(1);
      const AV b = eval(kids[1]);
      if (b.known && b.bits)
        return scalar(1);
      return a.known && b.known ? scalar(0) : AV{};
    }
    case Op::Xor: {
      const AV a = eval(kids[0]), b = eval(kids[1]);
      return a.known && b.known ? scalar(a.bits ^ b.bits) : AV{};
    }
    case Op::Eq: {
      bool all = true;
      for (std::size_t i = 1; i < kids.size(); ++i) {
        const AV r = eq(kids[i - 1], kids[i]);
        if (r.known && !r.bits)
          return scalar(0);
        all = all && r.known;
      }
      return all ? scalar(1) : AV{};
    }
    case Op::Distinct: {
      bool all = true;
      for (std::size_t i = 0; i < kids.size(); ++i)
        for (std::size_t j = i + 1; j < kids.size(); ++j) {
          const AV r = eq(kids[i], kids[j]);
          if (r.known && r.bits)
            return scalar(0);
          all = all && r.known;
        }
      return all ? scalar(1) : AV{};
    }
    case Op::Ite: {
      const AV c = eval(kids[0]);
      if (c.known)
        return eval(kids[c.bits ? 1 : 2]);
      if (kids[1] == kids[2])
        return eval(kids[1]);
      const AV a = eval(kids[1]), b = eval(kids[2]);
      if (!s_.is_array(sort))
        return same(a, b) ? a : AV{};
      return unknown(s_, sort);
    }
    case Op::Select: {
      const AV a = eval(kids[0]), i = eval(kids[1]);
      for (auto it = a.arr->writes.rbegin(); it != a.arr->writes.rend(); ++it) {
        if (!it->first.known || !i.known)
          return unknown(s_, sort);
        if (it->first.bits == i.bits)
          return it->second;
      }
      return a.arr->def;
    }
    case Op::Store: {
      const AV a = eval(kids[0]);
      auto n = std::make_shared<Arr>(*a.arr);
      n->writes.emplace_back(eval(kids[1]), eval(kids[2]));
      return {false, 0, n};
    }
    default: break;
    }
    if (!bv::is_bv_function(op))
      throw Error(ErrorKind::Internal, "abstract evaluation of unhandled operator");
    std::vector<std::uint64_t> vals;
    std::vector<unsigned> widths;
    std::vector<AV> args;
    bool all = true;
    for (Term k : kids) {
      args.push_back(eval(k));
      vals.push_back(args.back().bits);
      widths.push_back(s_.width(s_.sort(k)));
      all = all && args.back().known;
    }
    if (all)
      return scalar(bv::apply(op, vals, widths, s_.params(t), w));
    return absorbed(op, args, widths);
  }

  // Results forced by a known operand.
  static AV absorbed(Op op, const std::vector<AV> &a, const std::vector<unsigned> &widths) {
    auto is = [&](std::size_t i, std::uint64_t v) { return a[i].known && a[i].bits == v; };
    auto any = [&](std::uint64_t v) {
      for (std::size_t i = 0; i < a.size(); ++i)
        if (is(i, v))
          return true;
      return false;
    };
    const unsigned w = widths.empty() ? 0 : widths[0];
    const std::uint64_t ones = bv::mask(w);
    switch (op) {
    case Op::BvMul:
    case Op::BvAnd: return any(0) ? scalar(0) : AV{};
    case Op::BvOr: return any(ones) ? scalar(ones) : AV{};
    case Op::BvShl:
    case Op::BvLshr:
      if (is(0, 0) || (a[1].known && a[1].bits >= w))
        return scalar(0);
      return {};
    case Op::BvAshr:
    case Op::BvUrem: return is(0, 0) ? scalar(0) : AV{};
    case Op::BvUlt: return is(1, 0) ? scalar(0) : AV{};
    case Op::BvUgt: return is(0, 0) ? scalar(0) : AV{};
    case Op::BvUle: return is(0, 0) ? scalar(1) : AV{};
    case Op::BvUge: return is(1, 0) ? scalar(1) : AV{};
    default: return {};
    }
  }

  AV quantifier(Term t, bool forall) {
    const auto vars = s_.bound_vars(t);
    auto dom = domains_.find(t);
    if (dom == domains_.end()) {
      std::vector<std::optional<std::vector<Value>>> d;
      std::uint64_t combos = 1;
      for (Term v : vars) {
        auto vals = enumerate_domain(s_, s_.sort(v), budget_);
        if (vals && combos * vals->size() <= budget_)
          combos *= vals->size();
        else
          vals.reset(); // left unknown
        d.push_back(std::move(vals));
      }
      dom = domains_.emplace(t, std::move(d)).first;
    }
    const auto &d = dom->second;
    bool partial = false;
    const std::size_t mark = env_.size();
    for (std::size_t i = 0; i < vars.size(); ++i) {
      env_.emplace_back(vars[i], d[i] ? from_value((*d[i])[0]) : unknown(s_, s_.sort(vars[i])));
      partial = partial || !d[i];
    }
    // A forall is false once any instance is false, and true only when every
    // instance is true over fully enumerated variables.
    const std::uint64_t stop = forall ? 0 : 1;
    bool all = true;
    std::vector<std::size_t> digit(vars.size(), 0);
    while (true) {
      memo_.clear();
      const AV r = eval(s_.body(t));
      if (r.known && r.bits == stop) {
        env_.resize(mark);
        memo_.clear();
        return scalar(stop);
      }
      all = all && r.known;
      std::size_t i = 0;
      for (; i < vars.size(); ++i) {
        if (!d[i])
          continue;
        if (++digit[i] < d[i]->size()) {
          env_[mark + i].second = from_value((*d[i])[digit[i]]);
          break;
        }
        digit[i] = 0;
        env_[mark + i].second = from_value((*d[i])[0]);
      }
      if (i == vars.size())
        break;
    }
    env_.resize(mark);
    memo_.clear();
    return all && !partial ? scalar(!stop) : AV{};
  }

  TermStore &s_;
  std::uint64_t budget_;
  const TermMap<AV> *free_ = nullptr;
  Env env_;
  TermMap<AV> memo_;
  TermMap<std::vector<std::optional<std::vector<Value>>>> domains_;
};

} // namespace

BruteResult brute_force_abstract(TermStore &s, Term phi, std::uint64_t budget) {
  BruteResult res;
  std::vector<Term> vars = free_vars(s, phi);
  // Enumerate the smallest domains first within the budget; the rest stay
  // unknown.
  std::vector<std::pair<Term, std::vector<Value>>> enumerated;
  std::uint64_t combos = 1;
  {
    std::vector<std::pair<Term, std::vector<Value>>> cands;
    for (Term v : vars)
      if (auto d = enumerate_domain(s, s.sort(v), budget))
        cands.emplace_back(v, std::move(*d));
    std::stable_sort(cands.begin(), cands.end(),
                     [](const auto &a, const auto &b) { return a.second.size() < b.second.size(); });
    for (auto &c : cands)
      if (combos * c.second.size() <= budget) {
        combos *= c.second.size();
        enumerated.push_back(std::move(c));
      }
  }
  Abstract ab(s, std::uint64_t(1) << 16);
  TermMap<AV> free;
  for (auto &[v, d] : enumerated)
    free[v] = from_value(d[0]);
  std::vector<std::size_t> digit(enumerated.size(), 0);
  bool all_false = true;
  while (true) {
    ++res.evaluations;
    const AV r = ab.run(phi, free);
    if (r.known && r.bits) {
      res.verdict = BruteVerdict::Sat;
      for (std::size_t i = 0; i < enumerated.size(); ++i) {
        const Term v = enumerated[i].first;
        res.model.constants.emplace(std::string(s.name(v)), enumerated[i].second[digit[i]]);
      }
      return res;
    }
    all_false = all_false && r.known;
    std::size_t i = 0;
    for (; i < enumerated.size(); ++i) {
      if (++digit[i] < enumerated[i].second.size()) {
        free[enumerated[i].first] = from_value(enumerated[i].second[digit[i]]);
        break;
      }
      digit[i] = 0;
      free[enumerated[i].first] = from_value(enumerated[i].second[0]);
    }
    if (i == enumerated.size())
      break;
  }
  res.verdict = all_false ? BruteVerdict::Unsat : BruteVerdict::Unknown;
  return res;
}

} // namespace qsic
