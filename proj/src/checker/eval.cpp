#include "qsic/eval.hpp"

#include "qsic/bv.hpp"
#include "qsic/term_util.hpp"

#include <algorithm>
#include <unordered_map>

namespace qsic {

std::optional<std::vector<Value>> enumerate_domain(TermStore &s, Sort sort,
                                                   std::uint64_t max_values) {
  switch (s.kind(sort)) {
  case SortKind::Bool:
    if (max_values < 2)
      return std::nullopt;
    return std::vector<Value>{bool_value(s, false), bool_value(s, true)};
  case SortKind::BitVec: {
    const unsigned w = s.width(sort);
    if (w >= 63 || (1ULL << w) > max_values)
      return std::nullopt;
    std::vector<Value> out;
    out.reserve(1ULL << w);
    for (std::uint64_t v = 0; v < (1ULL << w); ++v)
      out.push_back(Value{sort, v, nullptr});
    return out;
  }
  case SortKind::Uninterpreted:
    return std::nullopt;
  case SortKind::Array: {
    const int ib = domain_bits(s, s.index_sort(sort));
    if (ib < 0 || ib > 20)
      return std::nullopt;
    const std::uint64_t cells = 1ULL << ib;
    auto elems = enumerate_domain(s, s.element_sort(sort), max_values);
    if (!elems)
      return std::nullopt;
    // |elems|^cells values
    std::uint64_t total = 1;
    for (std::uint64_t i = 0; i < cells; ++i) {
      if (total > max_values / elems->size())
        return std::nullopt;
      total *= elems->size();
    }
    std::vector<Value> out;
    out.reserve(total);
    std::vector<std::size_t> digit(cells, 0);
    for (std::uint64_t n = 0; n < total; ++n) {
      Value a = const_array(sort, (*elems)[0]);
      for (std::uint64_t c = 0; c < cells; ++c)
        if (digit[c] != 0)
          a = array_write(s, a, c, (*elems)[digit[c]]);
      out.push_back(std::move(a));
      for (std::uint64_t c = 0; c < cells; ++c) {
        if (++digit[c] < elems->size())
          break;
        digit[c] = 0;
      }
    }
    return out;
  }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

struct Evaluator::Tape {
  struct Instr {
    Op op;
    Sort sort;
    unsigned width = 0;   // result width for bitvectors
    std::uint32_t out = 0;
    std::vector<std::uint32_t> args;
    std::vector<unsigned> arg_widths;
    std::array<unsigned, 2> params{0, 0};
    std::size_t nparams = 0;
    std::uint64_t value = 0;
    std::string fun;                     // Apply
    int sub = -1;                        // binders: body tape
    std::vector<std::uint32_t> binders;  // binders: slots of bound variables
    std::vector<std::vector<Value>> domains; // quantifiers: per-variable domain
  };
  struct Sub {
    std::vector<Instr> code;
    std::uint32_t result = 0;
  };
  std::vector<Sub> subs; // subs[0] is the root
  std::size_t nslots = 0;
  std::vector<std::uint32_t> input_slots;
  std::vector<Value> constants; // preset slot values (literals)
  std::vector<std::uint32_t> constant_slots;
};

namespace {

struct Compiler {
  TermStore &s;
  Evaluator::Tape &tape;
  std::vector<Term> &inputs;
  std::uint64_t max_quant_values;
  TermMap<std::uint32_t> input_index;
  std::unordered_map<std::uint32_t, std::uint32_t> literal_slots;

  using Scope = std::vector<std::pair<Term, std::uint32_t>>; // innermost last

  std::uint32_t new_slot() { return static_cast<std::uint32_t>(tape.nslots++); }

  std::uint32_t literal(Term t) {
    auto it = literal_slots.find(t.id);
    if (it != literal_slots.end())
      return it->second;
    const std::uint32_t slot = new_slot();
    Value v{s.sort(t), s.value(t), nullptr};
    if (s.is_bool(s.sort(t)))
      v.bits = s.is_true(t) ? 1 : 0;
    tape.constants.push_back(v);
    tape.constant_slots.push_back(slot);
    literal_slots.emplace(t.id, slot);
    return slot;
  }

  std::uint32_t variable(Term v, const Scope &scope) {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->first == v)
        return it->second;
    auto in = input_index.find(v);
    if (in != input_index.end())
      return tape.input_slots[in->second];
    const std::uint32_t slot = new_slot();
    input_index.emplace(v, static_cast<std::uint32_t>(inputs.size()));
    inputs.push_back(v);
    tape.input_slots.push_back(slot);
    return slot;
  }

  // Compiles root into a new sub-tape under scope; returns its index.
  int compile(Term root, const Scope &scope) {
    const int idx = static_cast<int>(tape.subs.size());
    tape.subs.emplace_back();
    std::vector<Evaluator::Tape::Instr> code;
    TermMap<std::uint32_t> slot;

    std::vector<std::pair<Term, bool>> st{{root, false}};
    while (!st.empty()) {
      auto [t, expanded] = st.back();
      st.pop_back();
      if (slot.count(t))
        continue;
      const Op op = s.op(t);
      if (op == Op::Const) {
        slot[t] = literal(t);
        continue;
      }
      if (op == Op::Var) {
        slot[t] = variable(t, scope);
        continue;
      }
      const bool binder = op == Op::Let || is_quantifier(op);
      if (!expanded) {
        st.emplace_back(t, true);
        auto kids = s.kids(t);
        if (op == Op::Let) {
          for (std::size_t i = 1; i + 1 < kids.size(); i += 2)
            if (!slot.count(kids[i]))
              st.emplace_back(kids[i], false);
        } else if (!binder) {
          for (Term k : kids)
            if (!slot.count(k))
              st.emplace_back(k, false);
        }
        continue;
      }
      Evaluator::Tape::Instr in;
      in.op = op;
      in.sort = s.sort(t);
      in.width = s.is_bv(in.sort) ? s.width(in.sort) : 0;
      in.out = new_slot();
      auto kids = s.kids(t);
      if (op == Op::Let) {
        Scope inner = scope;
        for (std::size_t i = 0; i + 1 < kids.size(); i += 2) {
          in.args.push_back(slot.at(kids[i + 1]));
          const std::uint32_t b = new_slot();
          in.binders.push_back(b);
          inner.emplace_back(kids[i], b);
        }
        const Term body = kids.back();
        code.push_back(std::move(in));
        const std::size_t pos = code.size() - 1;
        const int sub = compile(body, inner);
        code[pos].sub = sub;
        slot[t] = code[pos].out;
        continue;
      }
      if (is_quantifier(op)) {
        Scope inner = scope;
        std::uint64_t combos = 1;
        for (Term v : s.bound_vars(t)) {
          const std::uint32_t b = new_slot();
          in.binders.push_back(b);
          inner.emplace_back(v, b);
          auto dom = enumerate_domain(s, s.sort(v), max_quant_values);
          if (!dom || (combos *= dom->size()) > max_quant_values)
            throw Error(ErrorKind::UnsupportedStructure,
                        "quantified variable '" + std::string(s.name(v)) +
                            "' has a domain too large to enumerate");
          in.domains.push_back(std::move(*dom));
        }
        code.push_back(std::move(in));
        const std::size_t pos = code.size() - 1;
        const int sub = compile(kids.back(), inner);
        code[pos].sub = sub;
        slot[t] = code[pos].out;
        continue;
      }
      for (Term k : kids) {
        in.args.push_back(slot.at(k));
        in.arg_widths.push_back(s.is_bv(s.sort(k)) ? s.width(s.sort(k)) : 0);
      }
      const auto p = s.params(t);
      in.nparams = p.size();
      std::copy(p.begin(), p.end(), in.params.begin());
      if (op == Op::Apply)
        in.fun = std::string(s.name(t));
      slot[t] = in.out;
      code.push_back(std::move(in));
    }
    tape.subs[idx].code = std::move(code);
    tape.subs[idx].result = slot.at(root);
    return idx;
  }
};

struct Runner {
  const TermStore &s;
  const Evaluator::Tape &tape;
  const Model *funs;
  std::vector<Value> &slots;

  void exec(int sub) {
    for (const auto &in : tape.subs[sub].code)
      step(in);
  }

  bool truth(std::uint32_t slot) const { return slots[slot].bits != 0; }

  void step(const Evaluator::Tape::Instr &in) {
    Value &out = slots[in.out];
    auto arg = [&](std::size_t i) -> const Value & { return slots[in.args[i]]; };
    switch (in.op) {
    case Op::Let:
      for (std::size_t i = 0; i < in.binders.size(); ++i)
        slots[in.binders[i]] = slots[in.args[i]];
      exec(in.sub);
      out = slots[tape.subs[in.sub].result];
      return;
    case Op::Forall:
    case Op::Exists: {
      const bool forall = in.op == Op::Forall;
      bool result = forall;
      std::vector<std::size_t> idx(in.binders.size(), 0);
      for (;;) {
        for (std::size_t i = 0; i < in.binders.size(); ++i)
          slots[in.binders[i]] = in.domains[i][idx[i]];
        exec(in.sub);
        const bool b = truth(tape.subs[in.sub].result);
        if (b != forall) {
          result = b;
          break;
        }
        std::size_t i = 0;
        for (; i < idx.size(); ++i) {
          if (++idx[i] < in.domains[i].size())
            break;
          idx[i] = 0;
        }
        if (i == idx.size())
          break;
      }
      out = Value{in.sort, result ? 1u : 0u, nullptr};
      return;
    }
    case Op::ConstArray:
      out = const_array(in.sort, arg(0));
      return;
    case Op::Apply: {
      if (!funs)
        throw Error(ErrorKind::IncompleteModel, "no interpretation for function '" + in.fun + "'");
      auto f = funs->functions.find(in.fun);
      if (f == funs->functions.end())
        throw Error(ErrorKind::IncompleteModel, "no interpretation for function '" + in.fun + "'");
      std::vector<std::uint64_t> key;
      for (std::size_t i = 0; i < in.args.size(); ++i) {
        if (arg(i).array)
          throw Error(ErrorKind::UnsupportedStructure,
                      "function '" + in.fun + "' applied to an array value");
        key.push_back(arg(i).bits);
      }
      auto e = f->second.table.find(key);
      out = e == f->second.table.end() ? f->second.default_value : e->second;
      return;
    }
    case Op::Not:
      out = Value{in.sort, truth(in.args[0]) ? 0u : 1u, nullptr};
      return;
    case Op::And: {
      bool r = true;
      for (auto a : in.args)
        r = r && slots[a].bits != 0;
      out = Value{in.sort, r, nullptr};
      return;
    }
    case Op::Or: {
      bool r = false;
      for (auto a : in.args)
        r = r || slots[a].bits != 0;
      out = Value{in.sort, r, nullptr};
      return;
    }
    case Op::Implies:
      out = Value{in.sort, !truth(in.args[0]) || truth(in.args[1]), nullptr};
      return;
    case Op::Xor:
      out = Value{in.sort, truth(in.args[0]) != truth(in.args[1]), nullptr};
      return;
    case Op::Eq: {
      bool r = true;
      for (std::size_t i = 1; i < in.args.size() && r; ++i)
        r = values_equal(s, arg(0), arg(i));
      out = Value{in.sort, r, nullptr};
      return;
    }
    case Op::Distinct: {
      bool r = true;
      for (std::size_t i = 0; i < in.args.size() && r; ++i)
        for (std::size_t j = i + 1; j < in.args.size() && r; ++j)
          r = !values_equal(s, arg(i), arg(j));
      out = Value{in.sort, r, nullptr};
      return;
    }
    case Op::Ite:
      out = truth(in.args[0]) ? arg(1) : arg(2);
      return;
    case Op::Select: {
      const Value &a = arg(0);
      out = array_read(a, arg(1).bits);
      return;
    }
    case Op::Store:
      out = array_write(s, arg(0), arg(1).bits, arg(2));
      return;
    default: {
      std::uint64_t vals[2] = {0, 0};
      const std::size_t n = in.args.size();
      for (std::size_t i = 0; i < n; ++i)
        vals[i] = slots[in.args[i]].bits;
      const std::uint64_t r =
          bv::apply(in.op, std::span<const std::uint64_t>(vals, n), in.arg_widths,
                    std::span<const unsigned>(in.params.data(), in.nparams),
                    in.width ? in.width : 1);
      out = Value{in.sort, r, nullptr};
      return;
    }
    }
  }
};

} // namespace

Evaluator::Evaluator(TermStore &store, Term root, std::uint64_t max_quant_values)
    : s_(store), tape_(std::make_unique<Tape>()) {
  Compiler c{store, *tape_, inputs_, max_quant_values, {}, {}};
  c.compile(root, {});
}

Evaluator::~Evaluator() = default;
Evaluator::Evaluator(Evaluator &&) noexcept = default;

Value Evaluator::run(std::span<const Value> input_values) const {
  return run_impl(input_values, funs_);
}

Value Evaluator::run_impl(std::span<const Value> input_values, const Model *funs) const {
  if (input_values.size() != inputs_.size())
    throw Error(ErrorKind::InvalidArgument, "evaluator expects " + std::to_string(inputs_.size()) +
                                                " input values");
  std::vector<Value> slots(tape_->nslots);
  for (std::size_t i = 0; i < tape_->constant_slots.size(); ++i)
    slots[tape_->constant_slots[i]] = tape_->constants[i];
  for (std::size_t i = 0; i < inputs_.size(); ++i)
    slots[tape_->input_slots[i]] = input_values[i];
  Runner r{s_, *tape_, funs, slots};
  r.exec(0);
  return slots[tape_->subs[0].result];
}

Value Evaluator::run(const Model &m) const {
  std::vector<Value> vals;
  vals.reserve(inputs_.size());
  for (Term v : inputs_) {
    const Value *val = m.find(s_.name(v));
    if (!val)
      throw Error(ErrorKind::IncompleteModel,
                  "model has no value for '" + std::string(s_.name(v)) + "'");
    if (val->sort != s_.sort(v))
      throw Error(ErrorKind::IncompleteModel,
                  "model value for '" + std::string(s_.name(v)) + "' has sort " +
                      s_.to_string(val->sort) + ", expected " + s_.to_string(s_.sort(v)));
    vals.push_back(*val);
  }
  return run_impl(vals, funs_ ? funs_ : &m);
}

Value eval(TermStore &store, Term t, const Model &m) {
  Evaluator ev(store, t);
  ev.set_functions(&m);
  return ev.run(m);
}

} // namespace qsic
