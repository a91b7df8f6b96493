#include "qsic/bv.hpp"
#include "qsic/sexpr.hpp"
#include "qsic/sic.hpp"
#include "qsic/smtlib.hpp"
#include "qsic/term_util.hpp"

#include <algorithm>

namespace qsic {

struct SicEngine::Impl {
  TermMap<Term> cache;
  TermMap<std::size_t> shadow_of; // original array -> index into shadows_
  std::vector<TermSet> shadow_reads;
  struct Template {
    Term body;
    std::vector<Term> placeholders;
  };
  std::unordered_map<std::string, Template> templates;
  std::unordered_map<std::string, std::uint64_t> skeletons;
};

SicEngine::SicEngine(TermStore &store, const AbsorptionRegistry &registry, TermSet targets,
                     SicOptions opts)
    : s_(store), reg_(registry), targets_(std::move(targets)), opts_(opts),
      impl_(std::make_unique<Impl>()) {}

SicEngine::~SicEngine() = default;

Term SicEngine::taint_of_var(Term v) const { return s_.mk_bool(!targets_.count(v)); }

namespace {

// Smart constructors. With fold off they only normalise arity.
struct Builder {
  TermStore &s;
  bool fold;

  Term and_(std::initializer_list<Term> ts) { return nary(Op::And, ts, true); }
  Term or_(std::initializer_list<Term> ts) { return nary(Op::Or, ts, false); }

  Term nary(Op op, std::span<const Term> ts, bool unit) {
    std::vector<Term> kids;
    for (Term t : ts) {
      if (fold) {
        if (s.is_const(t)) {
          if ((s.value(t) != 0) == unit)
            continue;
          return s.mk_bool(!unit);
        }
        if (std::find(kids.begin(), kids.end(), t) != kids.end())
          continue;
      }
      kids.push_back(t);
    }
    if (kids.empty())
      return s.mk_bool(unit);
    if (kids.size() == 1)
      return kids[0];
    return s.mk(op, kids);
  }

  Term ite(Term c, Term a, Term b) {
    if (fold) {
      if (s.is_const(c))
        return s.value(c) ? a : b;
      if (a == b)
        return a;
    }
    return s.mk(Op::Ite, {c, a, b});
  }

  Term eq(Term a, Term b) {
    if (fold) {
      if (a == b)
        return s.mk_true();
      if (s.is_const(a) && s.is_const(b))
        return s.mk_false();
    }
    return s.mk(Op::Eq, {a, b});
  }

  Term select(Term a, Term i) {
    if (fold && s.op(a) == Op::ConstArray)
      return s.kid(a, 0);
    return s.mk(Op::Select, {a, i});
  }
};

std::string function_symbol(const TermStore &s, Term t) {
  return s.op(t) == Op::Apply ? std::string(s.name(t)) : std::string(op_name(s.op(t)));
}

// Extra inputs of a node beyond its children: a select over a store, ite or
// constant array needs the SICs of the store's parts and of the unfolded
// reads. Results come after the children, in this order.
void dependencies(TermStore &s, Term t, std::vector<Term> &out) {
  out.assign(s.kids(t).begin(), s.kids(t).end());
  switch (s.op(t)) {
  case Op::Let:
  case Op::Forall:
  case Op::Exists:
    throw Error(ErrorKind::UnsupportedStructure,
                "SIC inference needs a quantifier-free, let-free term");
  case Op::Select: {
    const Term a = s.kid(t, 0), j = s.kid(t, 1);
    switch (s.op(a)) {
    case Op::Store: // i, e, (select a' j)
      out.push_back(s.kid(a, 1));
      out.push_back(s.kid(a, 2));
      out.push_back(s.mk(Op::Select, {s.kid(a, 0), j}));
      break;
    case Op::Ite: // c, (select a1 j), (select a2 j)
      out.push_back(s.kid(a, 0));
      out.push_back(s.mk(Op::Select, {s.kid(a, 1), j}));
      out.push_back(s.mk(Op::Select, {s.kid(a, 2), j}));
      break;
    case Op::ConstArray:
      out.push_back(s.kid(a, 0));
      break;
    default:
      break;
    }
    break;
  }
  default:
    break;
  }
}

} // namespace

Term SicEngine::infer_term(Term root) {
  Builder b{s_, opts_.fold};
  auto leaf = [&](Term t, Term &out) {
    if (s_.op(t) == Op::Const) {
      out = s_.mk_true();
      return true;
    }
    if (s_.op(t) == Op::Var) {
      out = taint_of_var(t);
      return true;
    }
    if (opts_.memoize) {
      auto it = impl_->cache.find(t);
      if (it != impl_->cache.end()) {
        out = it->second;
        return true;
      }
    }
    return false;
  };

  Term result;
  if (leaf(root, result))
    return result;

  struct Frame {
    Term t;
    std::vector<Term> deps;
    std::vector<Term> res;
  };
  std::vector<Frame> stack;
  stack.push_back({root, {}, {}});
  dependencies(s_, root, stack.back().deps);
  while (true) {
    Frame &f = stack.back();
    if (f.res.size() < f.deps.size()) {
      const Term d = f.deps[f.res.size()];
      Term r;
      if (leaf(d, r)) {
        f.res.push_back(r);
      } else {
        Frame nf{d, {}, {}};
        dependencies(s_, d, nf.deps);
        stack.push_back(std::move(nf));
      }
      continue;
    }
    const std::size_t nk = s_.num_kids(f.t);
    const Term theory = theory_sic(f.t, f.res);
    Term r = b.or_({theory, b.nary(Op::And, std::span<const Term>(f.res).first(nk), true)});
    if (opts_.memoize)
      impl_->cache.emplace(f.t, r);
    stack.pop_back();
    if (stack.empty())
      return r;
    stack.back().res.push_back(r);
  }
}

Term SicEngine::theory_sic(Term t, std::span<const Term> sics) {
  Builder b{s_, opts_.fold};
  const auto kids = s_.kids(t);

  // Callers outside infer_term pass only the children's SICs.
  std::vector<Term> full;
  if (s_.op(t) == Op::Select) {
    std::vector<Term> deps;
    dependencies(s_, t, deps);
    if (sics.size() < deps.size()) {
      full.assign(sics.begin(), sics.end());
      for (std::size_t i = full.size(); i < deps.size(); ++i)
        full.push_back(infer_term(deps[i]));
      sics = full;
    }
  }
  if (sics.size() < kids.size())
    throw Error(ErrorKind::InvalidArgument, "theory_sic: missing argument SICs");

  std::vector<Term> disj;
  switch (s_.op(t)) {
  case Op::Ite: {
    const Term c = kids[0], x = kids[1], y = kids[2];
    disj.push_back(b.and_({sics[0], b.ite(c, sics[1], sics[2])}));
    disj.push_back(b.and_({sics[1], sics[2], b.eq(x, y)}));
    break;
  }
  case Op::Select: {
    const Term a = kids[0], j = kids[1];
    const Term tj = sics[1];
    switch (s_.op(a)) {
    case Op::Var: {
      const Sort shadow_sort = s_.array_sort(s_.index_sort(s_.sort(a)), s_.bool_sort());
      Term shadow;
      if (opts_.shadow == ShadowMode::ConstArray) {
        shadow = s_.mk_const_array(shadow_sort, taint_of_var(a));
      } else {
        auto it = impl_->shadow_of.find(a);
        if (it == impl_->shadow_of.end()) {
          const std::string name = s_.symbols().fresh("qsic!shadow!" + std::string(s_.name(a)));
          s_.symbols().declare(name, FunSig{{}, shadow_sort});
          it = impl_->shadow_of.emplace(a, shadows_.size()).first;
          shadows_.push_back({a, s_.mk_var(name, shadow_sort), {}});
          impl_->shadow_reads.emplace_back();
        }
        auto &sh = shadows_[it->second];
        if (impl_->shadow_reads[it->second].insert(j).second)
          sh.read_indices.push_back(j);
        shadow = sh.shadow;
      }
      disj.push_back(b.and_({b.select(shadow, j), tj}));
      break;
    }
    case Op::Store: {
      const Term i = s_.kid(a, 1), e = s_.kid(a, 2);
      const Term ti = sics[2], te = sics[3], ts = sics[4];
      const Term read = s_.mk(Op::Select, {s_.kid(a, 0), j});
      disj.push_back(b.and_({ti, tj, b.ite(b.eq(i, j), te, ts)}));
      disj.push_back(b.and_({te, ts, b.eq(e, read)}));
      break;
    }
    case Op::Ite: {
      const Term c = s_.kid(a, 0);
      const Term r1 = s_.mk(Op::Select, {s_.kid(a, 1), j});
      const Term r2 = s_.mk(Op::Select, {s_.kid(a, 2), j});
      const Term tc = sics[2], t1 = sics[3], t2 = sics[4];
      disj.push_back(b.and_({tc, b.ite(c, t1, t2)}));
      disj.push_back(b.and_({t1, t2, b.eq(r1, r2)}));
      break;
    }
    case Op::ConstArray:
      disj.push_back(sics[2]);
      break;
    default:
      break;
    }
    break;
  }
  default:
    break;
  }

  if (s_.op(t) != Op::Var && s_.op(t) != Op::Const) {
    for (const AbsorptionRule &rule :
         reg_.rules(function_symbol(s_, t), static_cast<unsigned>(kids.size()))) {
      // Template instances are cached per argument-sort signature.
      std::string key = rule.relation;
      for (Term k : kids)
        key += "|" + std::to_string(s_.sort(k).id);
      auto it = impl_->templates.find(key);
      if (it == impl_->templates.end()) {
        Impl::Template tp;
        for (std::size_t i = 0; i < kids.size(); ++i)
          tp.placeholders.push_back(s_.mk_var("$" + std::to_string(i + 1), s_.sort(kids[i])));
        // expand the width macros
        SExprArena ar;
        const std::uint32_t root = ar.read(rule.relation).at(0);
        std::string text;
        std::vector<std::pair<std::uint32_t, bool>> work{{root, false}};
        while (!work.empty()) {
          auto [id, closing] = work.back();
          work.pop_back();
          if (closing) {
            text += ")";
            continue;
          }
          const SNode &n = ar[id];
          if (n.kind == SKind::List && n.items.size() == 2 &&
              (ar.is_symbol(n.items[0], "zeros") || ar.is_symbol(n.items[0], "ones") ||
               ar.is_symbol(n.items[0], "width"))) {
            const unsigned k = static_cast<unsigned>(std::stoul(ar[n.items[1]].text.substr(1)));
            const Sort srt = s_.sort(kids[k - 1]);
            if (!s_.is_bv(srt))
              throw Error(ErrorKind::MalformedRule,
                          "absorption rule for '" + rule.symbol + "': " + ar.to_text(id) +
                              " applied to a non-bitvector argument");
            const unsigned w = s_.width(srt);
            const std::uint64_t v = ar.is_symbol(n.items[0], "zeros")  ? 0
                                    : ar.is_symbol(n.items[0], "ones") ? bv::mask(w)
                                                                       : (w & bv::mask(w));
            text += " " + print_bv(v, w);
            continue;
          }
          if (n.kind != SKind::List) {
            text += " " + ar.to_text(id);
            continue;
          }
          text += " (";
          work.push_back({id, true});
          for (auto c = n.items.rbegin(); c != n.items.rend(); ++c)
            work.push_back({*c, false});
        }
        try {
          tp.body = parse_term(s_, text, tp.placeholders);
        } catch (const Error &e) {
          throw Error(ErrorKind::MalformedRule,
                      "absorption rule for '" + rule.symbol + "': " + e.what());
        }
        if (!s_.is_bool(s_.sort(tp.body)))
          throw Error(ErrorKind::MalformedRule,
                      "absorption rule for '" + rule.symbol + "': relation is not Boolean");
        it = impl_->templates.emplace(std::move(key), std::move(tp)).first;
      }
      TermMap<Term> sub;
      for (std::size_t i = 0; i < kids.size(); ++i)
        sub.emplace(it->second.placeholders[i], kids[i]);
      std::vector<Term> conj{substitute(s_, it->second.body, sub)};
      for (unsigned i : rule.support)
        conj.push_back(sics[i - 1]);
      disj.push_back(b.nary(Op::And, conj, true));
    }
  }
  return b.nary(Op::Or, disj, false);
}

std::vector<Term> SicEngine::shadow_constraints() {
  Builder b{s_, opts_.fold};
  std::vector<Term> out;
  for (const auto &sh : shadows_)
    for (Term j : sh.read_indices)
      out.push_back(b.eq(s_.mk(Op::Select, {sh.shadow, j}), taint_of_var(sh.original)));
  return out;
}

SicResult SicEngine::infer(Term t) {
  t = expand_lets(s_, t);
  if (has_quantifier(s_, t))
    throw Error(ErrorKind::UnsupportedStructure, "SIC inference needs a quantifier-free term");
  Builder b{s_, opts_.fold};
  std::vector<Term> conj{infer_term(t)};
  for (Term c : shadow_constraints())
    conj.push_back(c);
  SicResult r{b.nary(Op::And, conj, true), false};
  // true is weaker than anything, so a true SIC is the weakest one.
  r.is_wic = s_.is_true(r.formula);
  return r;
}

std::vector<std::pair<Term, Term>> SicEngine::cached() const {
  return {impl_->cache.begin(), impl_->cache.end()};
}

std::uint64_t SicEngine::skeleton_size(Term app) {
  const Op op = s_.op(app);
  if (op == Op::Var || op == Op::Const)
    return 0;
  std::string key = function_symbol(s_, app);
  for (Term k : s_.kids(app))
    key += "|" + std::to_string(s_.sort(k).id);
  if (op == Op::Select)
    key += "|" + std::string(op_name(s_.op(s_.kid(app, 0))));
  if (auto it = impl_->skeletons.find(key); it != impl_->skeletons.end())
    return it->second;

  // Rebuild the node over placeholder leaves, keeping the shape that the
  // select rule looks at.
  TermSet refs;
  auto ph = [&](Sort srt) {
    Term v = s_.mk_var(s_.symbols().fresh("qsic!k"), srt);
    refs.insert(v);
    return v;
  };
  std::vector<Term> args;
  for (Term k : s_.kids(app))
    args.push_back(ph(s_.sort(k)));
  if (op == Op::Select) {
    const Term a = s_.kid(app, 0);
    std::vector<Term> inner;
    if (s_.op(a) != Op::Var) {
      for (Term k : s_.kids(a))
        inner.push_back(ph(s_.sort(k)));
      args[0] = s_.op(a) == Op::ConstArray ? s_.mk_const_array(s_.sort(a), inner[0])
                                           : s_.rebuild(a, inner);
      refs.insert(args[0]);
    }
  }
  const Term synth = op == Op::Apply ? s_.mk_apply(s_.name(app), args) : s_.rebuild(app, args);
  std::vector<Term> deps;
  dependencies(s_, synth, deps);
  std::vector<Term> sics;
  for (std::size_t i = 0; i < deps.size(); ++i)
    sics.push_back(ph(s_.bool_sort()));

  const bool fold = opts_.fold;
  const auto saved = shadows_.size();
  opts_.fold = false;
  Term skel;
  try {
    skel = theory_sic(synth, sics);
  } catch (...) {
    opts_.fold = fold;
    throw;
  }
  opts_.fold = fold;
  // a Declared-mode shadow created for the placeholder array is not real
  for (std::size_t i = saved; i < shadows_.size(); ++i) {
    impl_->shadow_of.erase(shadows_[i].original);
    s_.symbols().undeclare(std::string(s_.name(shadows_[i].shadow)));
  }
  shadows_.resize(saved);
  impl_->shadow_reads.resize(saved);
  const std::uint64_t size = s_.is_const(skel) ? 1 : shared_size(s_, skel, refs);
  impl_->skeletons.emplace(std::move(key), size);
  return size;
}

std::optional<SicResult> detect_trivial_wic(const TermStore &s, Term t, const TermSet &targets) {
  if (mentions(s, t, targets))
    return std::nullopt;
  return SicResult{s.mk_true(), true};
}

std::uint64_t shared_size(const TermStore &s, Term t, const TermSet &refs) {
  std::uint64_t total = 1;
  TermSet seen;
  std::vector<Term> stack{t};
  while (!stack.empty()) {
    const Term n = stack.back();
    stack.pop_back();
    if (refs.count(n) || s.num_kids(n) == 0 || !seen.insert(n).second)
      continue;
    total += 1 + s.num_kids(n);
    for (Term k : s.kids(n))
      stack.push_back(k);
  }
  return total;
}

SizeBound measure_size_bound(SicEngine &engine, Term matrix, Term raw_sic) {
  TermStore &s = engine.store();
  matrix = expand_lets(s, matrix);
  SizeBound out;
  out.input_size = size(s, matrix);
  out.k = 1; // a leaf's SIC is one constant
  TermSet refs;
  post_order(s, matrix, [&](Term t) {
    refs.insert(t);
    if (s.num_kids(t) == 0)
      return;
    out.n = std::max<std::uint64_t>(out.n, s.num_kids(t));
    out.k = std::max(out.k, engine.skeleton_size(t) + 4); // + the or/and glue
  });
  out.sic_size = shared_size(s, raw_sic, refs);
  return out;
}

} // namespace qsic
