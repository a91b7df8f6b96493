#include "qsic/model.hpp"

#include "qsic/bv.hpp"
#include "qsic/eval.hpp"
#include "qsic/sexpr.hpp"
#include "qsic/smtlib.hpp"
#include "qsic/term_util.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace qsic {

void Model::erase(std::string_view name) {
  if (auto it = constants.find(name); it != constants.end())
    constants.erase(it);
  if (auto it = functions.find(name); it != functions.end())
    functions.erase(it);
}

Value bool_value(const TermStore &s, bool b) { return Value{s.bool_sort(), b ? 1u : 0u, nullptr}; }

Value bv_value(TermStore &s, std::uint64_t v, unsigned width) {
  return Value{s.bv_sort(width), v & bv::mask(width), nullptr};
}

Value const_array(Sort array_sort, Value element) {
  auto a = std::make_shared<ArrayValue>();
  a->default_value = std::move(element);
  return Value{array_sort, 0, std::move(a)};
}

const Value &array_read(const Value &a, std::uint64_t index) {
  auto it = a.array->entries.find(index);
  return it == a.array->entries.end() ? a.array->default_value : it->second;
}

Value array_write(const TermStore &s, const Value &a, std::uint64_t index, Value e) {
  auto copy = std::make_shared<ArrayValue>(*a.array);
  if (values_equal(s, e, copy->default_value))
    copy->entries.erase(index);
  else
    copy->entries[index] = std::move(e);
  return Value{a.sort, 0, std::move(copy)};
}

Value default_value(const TermStore &s, Sort sort) {
  if (s.is_array(sort))
    return const_array(sort, default_value(s, s.element_sort(sort)));
  return Value{sort, 0, nullptr};
}

int domain_bits(const TermStore &s, Sort scalar) {
  switch (s.kind(scalar)) {
  case SortKind::Bool: return 1;
  case SortKind::BitVec: return static_cast<int>(s.width(scalar));
  default: return -1;
  }
}

bool values_equal(const TermStore &s, const Value &a, const Value &b) {
  if (a.sort != b.sort)
    return false;
  if (!a.array || !b.array)
    return a.bits == b.bits && !a.array && !b.array;
  if (a.array == b.array)
    return true;
  std::set<std::uint64_t> keys;
  for (const auto &[k, v] : a.array->entries)
    keys.insert(k);
  for (const auto &[k, v] : b.array->entries)
    keys.insert(k);
  for (std::uint64_t k : keys)
    if (!values_equal(s, array_read(a, k), array_read(b, k)))
      return false;
  if (values_equal(s, a.array->default_value, b.array->default_value))
    return true;
  const int bits = domain_bits(s, s.index_sort(a.sort));
  return bits >= 0 && bits < 63 && keys.size() == (1ULL << bits);
}

namespace {

std::string abstract_name(const TermStore &s, Sort sort, std::uint64_t id) {
  return std::string(s.sort_name(sort)) + "!val!" + std::to_string(id);
}

} // namespace

std::string value_to_smt(const TermStore &s, const Value &v) {
  switch (s.kind(v.sort)) {
  case SortKind::Bool:
    return v.bits ? "true" : "false";
  case SortKind::BitVec:
    return print_bv(v.bits, s.width(v.sort));
  case SortKind::Uninterpreted:
    return quote_symbol(abstract_name(s, v.sort, v.bits));
  case SortKind::Array: {
    std::string out = "((as const " + s.to_string(v.sort) + ") " +
                      value_to_smt(s, v.array->default_value) + ")";
    const Sort is = s.index_sort(v.sort);
    for (const auto &[k, e] : v.array->entries)
      out = "(store " + out + " " + value_to_smt(s, Value{is, k, nullptr}) + " " +
            value_to_smt(s, e) + ")";
    return out;
  }
  }
  return "?";
}

std::string print_model(const TermStore &s, const Model &m) {
  std::string out = "(\n";
  for (const auto &[name, v] : m.constants)
    out += "  (define-fun " + quote_symbol(name) + " () " + s.to_string(v.sort) + " " +
           value_to_smt(s, v) + ")\n";
  for (const auto &[name, f] : m.functions) {
    out += "  (define-fun " + quote_symbol(name) + " (";
    for (std::size_t i = 0; i < f.sig.domain.size(); ++i)
      out += (i ? " (x!" : "(x!") + std::to_string(i) + " " + s.to_string(f.sig.domain[i]) + ")";
    out += ") " + s.to_string(f.sig.range) + " ";
    std::string body = value_to_smt(s, f.default_value);
    for (auto it = f.table.rbegin(); it != f.table.rend(); ++it) {
      std::string cond;
      for (std::size_t i = 0; i < it->first.size(); ++i)
        cond += (i ? " (= x!" : "(= x!") + std::to_string(i) + " " +
                value_to_smt(s, Value{f.sig.domain[i], it->first[i], nullptr}) + ")";
      if (it->first.size() > 1)
        cond = "(and " + cond + ")";
      body = "(ite " + cond + " " + value_to_smt(s, it->second) + " " + body + ")";
    }
    out += body + ")\n";
  }
  return out + ")\n";
}

// ---------------------------------------------------------------------------
// parse_model

namespace {

class ModelReader {
public:
  explicit ModelReader(TermStore &s) : s_(s) {}

  Model read(std::string_view text) {
    std::vector<std::uint32_t> items;
    for (std::uint32_t top : ar_.read(text)) {
      const SNode &n = ar_[top];
      if (n.kind == SKind::Symbol && (n.text == "sat" || n.text == "unknown"))
        continue;
      if (n.kind != SKind::List)
        fail(top, ErrorKind::Parse, "expected a model, found '" + ar_.to_text(top) + "'");
      if (!n.items.empty() && ar_.is_symbol(n.items[0], "model")) {
        items.insert(items.end(), n.items.begin() + 1, n.items.end());
      } else if (!n.items.empty() && ar_[n.items[0]].kind == SKind::Symbol) {
        items.push_back(top);
      } else {
        items.insert(items.end(), n.items.begin(), n.items.end());
      }
    }
    try {
      for (std::uint32_t it : items)
        header(it);
      for (auto &d : defs_)
        parse_body(d);
      for (auto &d : defs_)
        resolve(d);
    } catch (...) {
      cleanup();
      throw;
    }
    cleanup();

    Model out;
    for (auto &d : defs_) {
      if (d.aux)
        continue;
      if (d.params.empty())
        out.constants[d.name] = d.value;
      else
        out.functions[d.name] = d.fun_value;
    }
    return out;
  }

private:
  struct Def {
    std::string name;
    std::uint32_t node;
    std::vector<Term> params;
    Sort range;
    std::uint32_t body_node;
    Term body;
    std::string alias_of; // (_ as-array f)
    bool aux = false;
    int state = 0;
    Value value;
    FunValue fun_value;
  };

  [[noreturn]] void fail(std::uint32_t node, ErrorKind kind, const std::string &msg) const {
    const SNode &n = ar_[node];
    if (kind == ErrorKind::Parse)
      throw ParseError(n.line, n.col, msg);
    throw Error(kind, std::to_string(n.line) + ":" + std::to_string(n.col) + ": " + msg);
  }

  const SNode &list(std::uint32_t node, std::size_t n, const char *what) const {
    const SNode &x = ar_[node];
    if (x.kind != SKind::List || x.items.size() < n)
      fail(node, ErrorKind::Parse, std::string("expected ") + what);
    return x;
  }

  std::vector<Term> param_list(std::uint32_t node) {
    std::vector<Term> out;
    for (std::uint32_t p : list(node, 0, "parameter list").items) {
      const SNode &pv = list(p, 2, "(name sort)");
      if (ar_[pv.items[0]].kind != SKind::Symbol)
        fail(p, ErrorKind::Parse, "expected parameter name");
      out.push_back(s_.mk_var(ar_[pv.items[0]].text, parse_sort(s_, ar_.to_text(pv.items[1]))));
    }
    return out;
  }

  void header(std::uint32_t node) {
    const SNode &n = list(node, 1, "model entry");
    if (ar_.is_symbol(n.items[0], "declare-fun") && n.items.size() == 4 &&
        ar_[n.items[2]].kind == SKind::List && ar_[n.items[2]].items.empty()) {
      // abstract element of an uninterpreted sort
      const std::string name = ar_[n.items[1]].text;
      const Sort srt = parse_sort(s_, ar_.to_text(n.items[3]));
      abstract(name, srt);
      return;
    }
    if (!ar_.is_symbol(n.items[0], "define-fun"))
      return; // cardinality constraints and other commentary
    if (n.items.size() != 5)
      fail(node, ErrorKind::Parse, "expected (define-fun name (params) sort body)");
    Def d;
    d.node = node;
    if (ar_[n.items[1]].kind != SKind::Symbol)
      fail(n.items[1], ErrorKind::Parse, "expected symbol");
    d.name = ar_[n.items[1]].text;
    d.params = param_list(n.items[2]);
    d.range = parse_sort(s_, ar_.to_text(n.items[3]));
    d.body_node = n.items[4];

    FunSig sig{{}, d.range};
    for (Term p : d.params)
      sig.domain.push_back(s_.sort(p));
    if (const FunSig *decl = s_.symbols().lookup(d.name)) {
      if (decl->domain != sig.domain || decl->range != sig.range)
        fail(node, ErrorKind::ModelShape,
             "model defines '" + d.name + "' with a signature different from its declaration");
    } else {
      d.aux = true;
      s_.symbols().declare(d.name, sig);
      temp_decls_.push_back(d.name);
    }
    index_[d.name] = defs_.size();
    defs_.push_back(std::move(d));
  }

  void abstract(const std::string &name, Sort srt) {
    if (s_.symbols().declared(name))
      return;
    s_.symbols().declare(name, FunSig{{}, srt});
    temp_decls_.push_back(name);
    std::uint64_t id = abstract_ids_[srt.id]++;
    // z3 names elements S!val!k; keep k when present
    const auto pos = name.rfind("!val!");
    if (pos != std::string::npos) {
      try {
        id = std::stoull(name.substr(pos + 5));
      } catch (...) {
      }
    }
    scratch_.constants[name] = Value{srt, id, nullptr};
  }

  void parse_body(Def &d) {
    std::uint32_t body = d.body_node;
    const SNode &b = ar_[body];
    if (b.kind == SKind::List && b.items.size() == 3 && ar_.is_symbol(b.items[0], "_") &&
        ar_.is_symbol(b.items[1], "as-array")) {
      d.alias_of = ar_[b.items[2]].text;
      return;
    }
    if (b.kind == SKind::List && b.items.size() == 3 && ar_.is_symbol(b.items[0], "lambda")) {
      if (!d.params.empty() || !s_.is_array(d.range))
        fail(body, ErrorKind::ModelShape, "lambda is only supported as an array value");
      d.params = param_list(b.items[1]);
      body = b.items[2];
      lambda_.insert(d.name);
    }
    d.body = parse_term(s_, ar_.to_text(body), d.params);
    const Sort want = lambda_.count(d.name) ? s_.element_sort(d.range) : d.range;
    if (s_.sort(d.body) != want)
      fail(body, ErrorKind::ModelShape, "body of '" + d.name + "' has the wrong sort");
  }

  void collect_deps(Term t, std::vector<std::string> &deps) {
    post_order(s_, t, [&](Term n) {
      if (s_.op(n) == Op::Var || s_.op(n) == Op::Apply) {
        std::string name(s_.name(n));
        if (index_.count(name))
          deps.push_back(std::move(name));
      }
    });
  }

  Value evaluate(Term t, std::span<const Term> params, std::span<const Value> args) {
    Evaluator ev(s_, t);
    ev.set_functions(&scratch_);
    std::vector<Value> in;
    for (Term v : ev.inputs()) {
      bool found = false;
      for (std::size_t i = 0; i < params.size(); ++i)
        if (params[i] == v) {
          in.push_back(args[i]);
          found = true;
          break;
        }
      if (found)
        continue;
      const Value *val = scratch_.find(s_.name(v));
      if (!val)
        throw Error(ErrorKind::UnboundSymbol,
                    "model refers to '" + std::string(s_.name(v)) + "' without defining it");
      in.push_back(*val);
    }
    return ev.run(in);
  }

  void resolve(Def &d) {
    if (d.state == 2)
      return;
    if (d.state == 1)
      fail(d.node, ErrorKind::ModelShape, "cyclic model definition of '" + d.name + "'");
    d.state = 1;
    if (!d.alias_of.empty()) {
      auto it = index_.find(d.alias_of);
      if (it == index_.end())
        fail(d.node, ErrorKind::UnboundSymbol, "as-array refers to undefined '" + d.alias_of + "'");
      Def &f = defs_[it->second];
      resolve(f);
      d.value = to_array(d, f.fun_value);
    } else {
      std::vector<std::string> deps;
      collect_deps(d.body, deps);
      for (const auto &name : deps)
        if (name != d.name)
          resolve(defs_[index_.at(name)]);
      if (d.params.empty()) {
        d.value = evaluate(d.body, {}, {});
      } else {
        d.fun_value = table(d);
        if (lambda_.count(d.name))
          d.value = to_array(d, d.fun_value);
      }
    }
    if (d.params.empty() || lambda_.count(d.name))
      scratch_.constants[d.name] = d.value;
    else
      scratch_.functions[d.name] = d.fun_value;
    if (lambda_.count(d.name))
      d.params.clear();
    d.state = 2;
  }

  Value to_array(const Def &d, const FunValue &f) {
    if (!s_.is_array(d.range) || f.sig.domain.size() != 1 ||
        f.sig.domain[0] != s_.index_sort(d.range) || f.sig.range != s_.element_sort(d.range))
      fail(d.node, ErrorKind::ModelShape, "as-array target of '" + d.name + "' has the wrong shape");
    Value a = const_array(d.range, f.default_value);
    for (const auto &[k, v] : f.table)
      a = array_write(s_, a, k[0], v);
    return a;
  }

  bool mentions_params(Term t, const Def &d) {
    TermSet ps(d.params.begin(), d.params.end());
    return mentions(s_, t, ps);
  }

  // One conjunction of (= param literal) atoms assigning every parameter.
  bool point(Term cond, const Def &d, std::vector<std::uint64_t> &key) {
    std::vector<Term> atoms;
    if (s_.op(cond) == Op::And)
      atoms.assign(s_.kids(cond).begin(), s_.kids(cond).end());
    else
      atoms.push_back(cond);
    key.assign(d.params.size(), 0);
    std::vector<bool> set(d.params.size(), false);
    for (Term a : atoms) {
      if (s_.op(a) != Op::Eq)
        return false;
      Term l = s_.kid(a, 0), r = s_.kid(a, 1);
      if (s_.is_var(r) && !s_.is_var(l))
        std::swap(l, r);
      auto it = std::find(d.params.begin(), d.params.end(), l);
      if (it == d.params.end() || mentions_params(r, d) || s_.is_array(s_.sort(r)))
        return false;
      const std::size_t i = static_cast<std::size_t>(it - d.params.begin());
      const std::uint64_t v = evaluate(r, {}, {}).bits;
      if (set[i] && key[i] != v)
        return false;
      key[i] = v;
      set[i] = true;
    }
    return std::all_of(set.begin(), set.end(), [](bool b) { return b; });
  }

  FunValue table(const Def &d) {
    FunValue f;
    for (Term p : d.params)
      f.sig.domain.push_back(s_.sort(p));
    f.sig.range = s_.sort(d.body); // element sort for lambda bodies

    Term cur = d.body;
    bool ok = true;
    while (ok && s_.op(cur) == Op::Ite) {
      const Term cond = s_.kid(cur, 0), then = s_.kid(cur, 1);
      if (mentions_params(then, d)) {
        ok = false;
        break;
      }
      std::vector<Term> disjuncts;
      if (s_.op(cond) == Op::Or)
        disjuncts.assign(s_.kids(cond).begin(), s_.kids(cond).end());
      else
        disjuncts.push_back(cond);
      const Value v = evaluate(then, {}, {});
      for (Term c : disjuncts) {
        std::vector<std::uint64_t> key;
        if (!point(c, d, key)) {
          ok = false;
          break;
        }
        f.table.emplace(std::move(key), v); // first match wins
      }
      cur = s_.kid(cur, 2);
    }
    if (ok && !mentions_params(cur, d)) {
      f.default_value = evaluate(cur, {}, {});
      for (auto it = f.table.begin(); it != f.table.end();) {
        if (values_equal(s_, it->second, f.default_value))
          it = f.table.erase(it);
        else
          ++it;
      }
      return f;
    }

    // General body: enumerate the (small) parameter domain.
    std::vector<std::vector<Value>> domains;
    std::uint64_t total = 1;
    for (Term p : d.params) {
      auto dom = enumerate_domain(s_, s_.sort(p), 1u << 16);
      if (!dom || s_.is_array(s_.sort(p)) || (total *= dom->size()) > (1u << 16))
        fail(d.node, ErrorKind::ModelShape,
             "unsupported encoding for the model of '" + d.name + "'");
      domains.push_back(std::move(*dom));
    }
    f.table.clear();
    std::vector<std::size_t> idx(domains.size(), 0);
    std::vector<Value> args(domains.size());
    bool first = true;
    for (;;) {
      std::vector<std::uint64_t> key;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        args[i] = domains[i][idx[i]];
        key.push_back(args[i].bits);
      }
      Value v = evaluate(d.body, d.params, args);
      if (first) {
        f.default_value = v;
        first = false;
      } else if (!values_equal(s_, v, f.default_value)) {
        f.table.emplace(std::move(key), std::move(v));
      }
      std::size_t i = 0;
      for (; i < idx.size(); ++i) {
        if (++idx[i] < domains[i].size())
          break;
        idx[i] = 0;
      }
      if (i == idx.size())
        break;
    }
    return f;
  }

  void cleanup() {
    for (const auto &name : temp_decls_)
      s_.symbols().undeclare(name);
    temp_decls_.clear();
  }

  TermStore &s_;
  SExprArena ar_;
  std::vector<Def> defs_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> temp_decls_;
  std::unordered_map<std::uint32_t, std::uint64_t> abstract_ids_;
  std::unordered_set<std::string> lambda_;
  Model scratch_;
};

} // namespace

Model parse_model(TermStore &store, std::string_view text) { return ModelReader(store).read(text); }

} // namespace qsic
