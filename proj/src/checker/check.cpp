#include "qsic/checker.hpp"

#include "abstract.hpp"

#include "qsic/error.hpp"
#include "qsic/eval.hpp"
#include "qsic/normalize.hpp"
#include "qsic/term_util.hpp"

#include <algorithm>
#include <functional>

namespace qsic {

Value random_value(TermStore &s, Sort sort, std::mt19937_64 &rng) {
  switch (s.kind(sort)) {
  case SortKind::Bool:
    return bool_value(s, rng() & 1);
  case SortKind::BitVec: {
    const unsigned w = s.width(sort);
    return Value{sort, w >= 64 ? rng() : rng() & ((1ULL << w) - 1), nullptr};
  }
  case SortKind::Uninterpreted:
    return Value{sort, rng() % 4, nullptr};
  case SortKind::Array: {
    Value a = const_array(sort, random_value(s, s.element_sort(sort), rng));
    const unsigned writes = rng() % 5;
    for (unsigned i = 0; i < writes; ++i) {
      const Value idx = random_value(s, s.index_sort(sort), rng);
      a = array_write(s, a, idx.bits, random_value(s, s.element_sort(sort), rng));
    }
    return a;
  }
  }
  throw Error(ErrorKind::Internal, "random_value: bad sort");
}

FunValue random_function(TermStore &s, const FunSig &sig, std::mt19937_64 &rng) {
  FunValue f;
  f.sig = sig;
  f.default_value = random_value(s, sig.range, rng);
  const unsigned rows = rng() % 6;
  for (unsigned r = 0; r < rows; ++r) {
    std::vector<std::uint64_t> key;
    for (Sort d : sig.domain)
      key.push_back(random_value(s, d, rng).bits);
    f.table[key] = random_value(s, sig.range, rng);
  }
  return f;
}

Term value_term(TermStore &s, const Value &v) {
  switch (s.kind(v.sort)) {
  case SortKind::Bool:
    return s.mk_bool(v.bits != 0);
  case SortKind::BitVec:
    return s.mk_bv(v.bits, s.width(v.sort));
  case SortKind::Array: {
    Term t = s.mk_const_array(v.sort, value_term(s, v.array->default_value));
    const Sort is = s.index_sort(v.sort);
    for (const auto &[k, e] : v.array->entries)
      t = s.mk(Op::Store, {t, value_term(s, Value{is, k, nullptr}), value_term(s, e)});
    return t;
  }
  case SortKind::Uninterpreted:
    break;
  }
  throw Error(ErrorKind::UnsupportedStructure,
              "uninterpreted values have no ground term: " + value_to_smt(s, v));
}

namespace {

// Joint valuations of a list of constants: enumerated in lexicographic order
// when small enough, otherwise sampled.
class Side {
public:
  Side(TermStore &s, std::vector<Term> vars, std::uint64_t budget, unsigned array_bits,
       unsigned samples)
      : s_(s), vars_(std::move(vars)), samples_(samples) {
    exact_ = true;
    total_ = 1;
    for (Term v : vars_) {
      const Sort so = s.sort(v);
      std::optional<std::vector<Value>> dom;
      if (!s.is_array(so) || array_content_bits(so) <= array_bits)
        dom = enumerate_domain(s, so, budget);
      if (!dom || total_ > budget / dom->size()) {
        exact_ = false;
        domains_.emplace_back();
        continue;
      }
      total_ *= dom->size();
      domains_.push_back(std::move(*dom));
    }
    if (!exact_)
      total_ = samples_;
  }

  bool exact() const { return exact_; }
  std::uint64_t count() const { return total_; }
  const std::vector<Term> &vars() const { return vars_; }

  // Calls f(values) for every valuation; stops when f returns false.
  bool each(std::mt19937_64 &rng, const std::function<bool(const std::vector<Value> &)> &f) const {
    std::vector<Value> vals(vars_.size());
    if (!exact_) {
      for (unsigned n = 0; n < samples_; ++n) {
        for (std::size_t i = 0; i < vars_.size(); ++i)
          vals[i] = domains_[i].empty() ? random_value(s_, s_.sort(vars_[i]), rng)
                                        : domains_[i][rng() % domains_[i].size()];
        if (!f(vals))
          return false;
      }
      return true;
    }
    std::vector<std::size_t> digit(vars_.size(), 0);
    for (std::size_t i = 0; i < vars_.size(); ++i)
      vals[i] = domains_[i][0];
    for (std::uint64_t n = 0; n < total_; ++n) {
      if (!f(vals))
        return false;
      // last variable varies fastest
      for (std::size_t i = vars_.size(); i-- > 0;) {
        if (++digit[i] < domains_[i].size()) {
          vals[i] = domains_[i][digit[i]];
          break;
        }
        digit[i] = 0;
        vals[i] = domains_[i][0];
      }
    }
    return true;
  }

private:
  unsigned array_content_bits(Sort so) const {
    const int ib = domain_bits(s_, s_.index_sort(so));
    const Sort es = s_.element_sort(so);
    int eb = -1;
    if (s_.is_bool(es))
      eb = 1;
    else if (s_.is_bv(es))
      eb = static_cast<int>(s_.width(es));
    if (ib < 0 || eb < 0 || ib > 20)
      return UINT32_MAX;
    return static_cast<unsigned>((1u << ib) * static_cast<unsigned>(eb));
  }

  TermStore &s_;
  std::vector<Term> vars_;
  std::vector<std::vector<Value>> domains_;
  unsigned samples_;
  bool exact_ = true;
  std::uint64_t total_ = 1;
};

Model to_model(const TermStore &s, const std::vector<Term> &vars, const std::vector<Value> &vals) {
  Model m;
  for (std::size_t i = 0; i < vars.size(); ++i)
    m.constants.emplace(std::string(s.name(vars[i])), vals[i]);
  return m;
}

// Uninterpreted function symbols applied anywhere in roots, with signatures.
std::map<std::string, FunSig> functions_of(const TermStore &s, std::span<const Term> roots) {
  std::map<std::string, FunSig> out;
  post_order(s, roots, [&](Term t) {
    if (s.op(t) != Op::Apply)
      return;
    FunSig sig;
    for (Term k : s.kids(t))
      sig.domain.push_back(s.sort(k));
    sig.range = s.sort(t);
    out.emplace(std::string(s.name(t)), std::move(sig));
  });
  return out;
}

// An evaluator whose inputs are read from a shared valuation of all_vars.
struct Bound {
  Evaluator ev;
  std::vector<std::size_t> slot;
  mutable std::vector<Value> buf;

  Bound(TermStore &s, Term t, const TermMap<std::size_t> &index) : ev(s, t) {
    for (Term v : ev.inputs())
      slot.push_back(index.at(v));
    buf.resize(slot.size());
  }
  Value run(const std::vector<Value> &all) const {
    for (std::size_t i = 0; i < slot.size(); ++i)
      buf[i] = all[slot[i]];
    return ev.run(buf);
  }
};

// Variable split and valuation sides shared by the independence checks.
// Valuations are laid out targets first, then the other constants.
struct Independence {
  TermStore &s;
  std::vector<Term> targets, others, all;
  TermMap<std::size_t> index;
  std::map<std::string, FunSig> funs;
  Side target_side, other_side;
  bool sampled;

  static std::vector<Term> split(TermStore &s, std::span<const Term> roots, const TermSet &targets,
                                 bool want_targets) {
    std::vector<Term> out;
    TermSet seen;
    for (Term r : roots)
      for (Term v : free_vars(s, r))
        if ((targets.count(v) != 0) == want_targets && seen.insert(v).second)
          out.push_back(v);
    return out;
  }

  Independence(TermStore &st, std::span<const Term> roots, const TermSet &tg, const Universe &u)
      : s(st), targets(split(st, roots, tg, true)), others(split(st, roots, tg, false)),
        funs(functions_of(st, roots)),
        target_side(st, targets, u.target_budget, u.array_content_bits, u.target_samples),
        other_side(st, others,
                   target_side.exact() ? u.pair_budget / std::max<std::uint64_t>(1, target_side.count())
                                       : 0,
                   u.array_content_bits, u.non_target_samples) {
    all = targets;
    all.insert(all.end(), others.begin(), others.end());
    for (std::size_t i = 0; i < all.size(); ++i)
      index.emplace(all[i], i);
    sampled = !target_side.exact() || !other_side.exact() || !funs.empty();
  }
};

} // namespace

CheckResult check_sic(TermStore &s, Term phi, Term psi, const TermSet &tg, const Universe &u) {
  const Term roots[] = {phi, psi};
  Independence ind(s, roots, tg, u);
  Bound ev_phi(s, phi, ind.index), ev_psi(s, psi, ind.index);
  std::mt19937_64 rng(u.seed);
  CheckResult res;
  res.sampled = ind.sampled;
  Model funs;
  ev_phi.ev.set_functions(&funs);
  ev_psi.ev.set_functions(&funs);
  std::vector<Value> all(ind.all.size());
  const std::size_t nt = ind.targets.size();

  // Functions are resampled per non-target valuation; with none there is
  // only one (empty) function valuation.
  const unsigned fun_rounds = ind.funs.empty() ? 1 : 4;
  for (unsigned fr = 0; fr < fun_rounds && res.ok; ++fr) {
    funs.functions.clear();
    for (const auto &[name, sig] : ind.funs)
      funs.functions.emplace(name, random_function(s, sig, rng));
    ind.other_side.each(rng, [&](const std::vector<Value> &a) {
      std::copy(a.begin(), a.end(), all.begin() + static_cast<std::ptrdiff_t>(nt));
      bool psi_seen = false, have_first = false, differ = false;
      Value first;
      std::vector<Value> x_psi, x_first, x_other;
      ind.target_side.each(rng, [&](const std::vector<Value> &x) {
        std::copy(x.begin(), x.end(), all.begin());
        res.evaluations += 2;
        const Value p = ev_psi.run(all);
        const Value v = ev_phi.run(all);
        if (p.bits && !psi_seen) {
          psi_seen = true;
          x_psi = x;
        }
        if (!have_first) {
          have_first = true;
          first = v;
          x_first = x;
        } else if (!differ && !values_equal(s, v, first)) {
          differ = true;
          x_other = x;
        }
        return !(psi_seen && differ);
      });
      if (psi_seen && differ) {
        res.ok = false;
        res.witness = to_model(s, ind.others, a);
        for (auto &[name, f] : funs.functions)
          res.witness.functions.emplace(name, f);
        res.targets = {to_model(s, ind.targets, x_psi), to_model(s, ind.targets, x_first),
                       to_model(s, ind.targets, x_other)};
        res.detail = "psi holds at the first target valuation while phi differs between the "
                     "second and third";
        return false;
      }
      return true;
    });
  }
  return res;
}

CheckResult check_wic(TermStore &s, Term phi, Term pi, const TermSet &tg, const Universe &u) {
  const Term roots[] = {phi, pi};
  Independence ind(s, roots, tg, u);
  Bound ev_phi(s, phi, ind.index), ev_pi(s, pi, ind.index);
  std::mt19937_64 rng(u.seed);
  CheckResult res;
  res.sampled = ind.sampled;
  Model funs;
  ev_phi.ev.set_functions(&funs);
  ev_pi.ev.set_functions(&funs);
  std::vector<Value> all(ind.all.size());
  const std::size_t nt = ind.targets.size();

  const unsigned fun_rounds = ind.funs.empty() ? 1 : 4;
  for (unsigned fr = 0; fr < fun_rounds && res.ok; ++fr) {
    funs.functions.clear();
    for (const auto &[name, sig] : ind.funs)
      funs.functions.emplace(name, random_function(s, sig, rng));
    ind.other_side.each(rng, [&](const std::vector<Value> &a) {
      std::copy(a.begin(), a.end(), all.begin() + static_cast<std::ptrdiff_t>(nt));
      // First pass: is phi independent of the targets here?
      bool have_first = false, independent = true;
      Value first;
      ind.target_side.each(rng, [&](const std::vector<Value> &x) {
        std::copy(x.begin(), x.end(), all.begin());
        ++res.evaluations;
        const Value v = ev_phi.run(all);
        if (!have_first) {
          have_first = true;
          first = v;
        } else if (!values_equal(s, v, first)) {
          independent = false;
          return false;
        }
        return true;
      });
      // Second pass: pi must agree with that at every target valuation.
      std::vector<Value> bad;
      const bool agree = ind.target_side.each(rng, [&](const std::vector<Value> &x) {
        std::copy(x.begin(), x.end(), all.begin());
        ++res.evaluations;
        if ((ev_pi.run(all).bits != 0) != independent) {
          bad = x;
          return false;
        }
        return true;
      });
      if (!agree) {
        res.ok = false;
        res.witness = to_model(s, ind.others, a);
        for (auto &[name, f] : funs.functions)
          res.witness.functions.emplace(name, f);
        res.targets = {to_model(s, ind.targets, bad)};
        res.detail = independent ? "pi is false although phi is independent of the targets"
                                 : "pi is true although phi depends on the targets";
        return false;
      }
      return true;
    });
  }
  return res;
}

CheckResult check_lifted_model(TermStore &s, Term original, const Model &m, const Universe &u) {
  CheckResult res;
  PrenexForm pf = prenex(s, expand_lets(s, original));
  // Existential variables fixed by the model become ground values; the
  // remaining quantifier prefix is re-wrapped around the matrix.
  TermMap<Term> fix;
  std::vector<QuantBlock> kept;
  std::vector<Term> universals;
  bool seen_exists_kept = false;
  for (const QuantBlock &b : pf.blocks) {
    QuantBlock nb{b.kind, {}};
    for (Term v : b.vars) {
      const Value *val = b.kind == Op::Exists ? m.find(s.name(v)) : nullptr;
      if (val && !seen_exists_kept)
        fix.emplace(v, value_term(s, *val));
      else
        nb.vars.push_back(v);
    }
    if (nb.vars.empty())
      continue;
    if (b.kind == Op::Exists)
      seen_exists_kept = true;
    else if (!seen_exists_kept)
      universals.insert(universals.end(), nb.vars.begin(), nb.vars.end());
    kept.push_back(std::move(nb));
  }
  // Leading universal blocks are enumerated by the Side below; everything
  // after the first kept existential stays quantified for the evaluator.
  Term body = substitute(s, pf.matrix, fix);
  std::size_t lead = 0;
  while (lead < kept.size() && kept[lead].kind == Op::Forall)
    ++lead;
  for (std::size_t i = kept.size(); i-- > lead;)
    body = s.mk_quant(kept[i].kind, kept[i].vars, body);

  // Free constants other than the enumerated universals come from m.
  std::vector<Term> consts;
  TermSet uset(universals.begin(), universals.end());
  for (Term v : free_vars(s, body))
    if (!uset.count(v))
      consts.push_back(v);

  Side side(s, universals, u.pair_budget, u.array_content_bits, u.non_target_samples);
  res.sampled = !side.exact();
  std::vector<Term> all = universals;
  all.insert(all.end(), consts.begin(), consts.end());
  TermMap<std::size_t> index;
  for (std::size_t i = 0; i < all.size(); ++i)
    index.emplace(all[i], i);
  Bound ev(s, body, index);
  ev.ev.set_functions(&m);
  std::vector<Value> vals(all.size());
  for (std::size_t i = 0; i < consts.size(); ++i) {
    const Value *v = m.find(s.name(consts[i]));
    if (!v)
      throw Error(ErrorKind::IncompleteModel,
                  "model has no value for '" + std::string(s.name(consts[i])) + "'");
    vals[universals.size() + i] = *v;
  }
  std::mt19937_64 rng(u.seed);
  side.each(rng, [&](const std::vector<Value> &x) {
    std::copy(x.begin(), x.end(), vals.begin());
    ++res.evaluations;
    if (ev.run(vals).bits)
      return true;
    res.ok = false;
    res.targets = {to_model(s, universals, x)};
    res.detail = "matrix is false at this valuation of the universal variables";
    return false;
  });
  return res;
}

BruteResult brute_force_solve(TermStore &s, Term phi, std::uint64_t budget) {
  BruteResult res;
  const Term root[] = {phi};
  if (!functions_of(s, root).empty())
    return brute_force_abstract(s, phi, budget);
  std::vector<Term> vars = free_vars(s, phi);
  Side side(s, vars, budget, 20, 0);
  if (!side.exact())
    return brute_force_abstract(s, phi, budget);
  TermMap<std::size_t> index;
  for (std::size_t i = 0; i < vars.size(); ++i)
    index.emplace(vars[i], i);
  std::mt19937_64 rng(0);
  try {
    // compiling rejects quantified domains that are too large
    Evaluator ev(s, phi);
    std::vector<std::size_t> slot;
    for (Term v : ev.inputs())
      slot.push_back(index.at(v));
    std::vector<Value> buf(slot.size());
    const bool all_false = side.each(rng, [&](const std::vector<Value> &x) {
      for (std::size_t i = 0; i < slot.size(); ++i)
        buf[i] = x[slot[i]];
      ++res.evaluations;
      if (!ev.run(buf).bits)
        return true;
      res.model = to_model(s, vars, x);
      return false;
    });
    res.verdict = all_false ? BruteVerdict::Unsat : BruteVerdict::Sat;
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::UnsupportedStructure)
      throw;
    return brute_force_abstract(s, phi, budget);
  }
  return res;
}

} // namespace qsic
