#include "qsic/sexpr.hpp"
#include "qsic/smtlib.hpp"
#include "qsic/term_util.hpp"

#include <algorithm>
#include <optional>
#include <unordered_map>
#include <unordered_set>

namespace qsic {

namespace {

// Builtins from SMT-LIB that we recognise but do not support; reported as
// unsupported rather than unbound.
const std::unordered_set<std::string_view> kUnsupported = {
    "bvredor", "bvredand", "bv2nat", "int2bv", "nat2bv", "bv2int", "+", "-", "*", "/", "div",
    "mod", "abs", "<", "<=", ">", ">=", "to_real", "to_int", "is_int", "fp", "str.++",
    "str.len", "bvultbv", "bvsaddo", "bvuaddo", "bvsmulo", "bvumulo", "bvnego", "bvsdivo",
    "ext_rotate_left", "ext_rotate_right", "lambda", "match", "par"};

const std::unordered_set<std::string_view> kLogics = {
    "ABV", "QF_ABV", "BV", "QF_BV", "AUFBV", "QF_AUFBV", "UFBV", "QF_UFBV", "ALL"};

bool plain_op(Op op) {
  switch (op) {
  case Op::Const: case Op::Var: case Op::ConstArray: case Op::Apply:
  case Op::Let: case Op::Forall: case Op::Exists:
    return false;
  default:
    return !is_indexed(op);
  }
}

bool left_assoc(Op op) {
  switch (op) {
  case Op::BvAdd: case Op::BvMul: case Op::BvAnd: case Op::BvOr: case Op::BvXor:
  case Op::Concat: case Op::Xor:
    return true;
  default:
    return false;
  }
}

std::uint64_t parse_u64(const std::string &digits) {
  std::uint64_t v = 0;
  for (char c : digits)
    v = v * 10 + static_cast<std::uint64_t>(c - '0'); // wraps mod 2^64 on purpose
  return v;
}

struct Macro {
  std::vector<Term> params;
  Term body;
};

class Parser {
public:
  Parser(TermStore &store, bool open_sorts = false) : s_(store), open_sorts_(open_sorts) {}

  Sort single_sort(std::string_view text) {
    auto top = ar_.read(text);
    if (top.size() != 1)
      throw ParseError(1, 1, "expected exactly one sort");
    return sort(top[0]);
  }

  Script script(std::string_view text) {
    Script out;
    for (std::uint32_t cmd : ar_.read(text))
      command(cmd, out);
    return out;
  }

  Term single_term(std::string_view text, std::span<const Term> bound) {
    auto top = ar_.read(text);
    if (top.size() != 1)
      throw ParseError(1, 1, "expected exactly one term");
    for (Term v : bound)
      scope_[std::string(s_.name(v))].push_back(v);
    return term(top[0]);
  }

private:
  struct Frame {
    std::uint32_t node;
    enum Kind { App, Let, Quant, Named } kind = App;
    std::vector<std::uint32_t> todo;
    std::size_t next = 0;
    std::vector<Term> vals;
    int phase = 0;
    std::vector<std::string> scoped; // names pushed on the scope by this frame
    std::vector<Term> binders;
    // App: head description
    std::string fun;
    std::optional<Op> op;
    std::vector<unsigned> params;
    Sort as_const;
  };

  [[noreturn]] void fail(std::uint32_t node, ErrorKind kind, const std::string &msg) const {
    const SNode &n = ar_[node];
    if (kind == ErrorKind::Parse)
      throw ParseError(n.line, n.col, msg);
    throw Error(kind, std::to_string(n.line) + ":" + std::to_string(n.col) + ": " + msg);
  }

  template <class F> auto at(std::uint32_t node, F &&f) -> decltype(f()) {
    try {
      return f();
    } catch (const ParseError &) {
      throw;
    } catch (const Error &e) {
      fail(node, e.kind(), e.what());
    }
  }

  const SNode &list(std::uint32_t node, std::size_t min_items, const char *what) const {
    const SNode &n = ar_[node];
    if (n.kind != SKind::List || n.items.size() < min_items)
      fail(node, ErrorKind::Parse, std::string("expected ") + what);
    return n;
  }

  std::string symbol(std::uint32_t node, const char *what = "symbol") const {
    const SNode &n = ar_[node];
    if (n.kind != SKind::Symbol)
      fail(node, ErrorKind::Parse, std::string("expected ") + what + ", found '" +
                                       ar_.to_text(node) + "'");
    return n.text;
  }

  unsigned numeral(std::uint32_t node) const {
    const SNode &n = ar_[node];
    if (n.kind != SKind::Numeral || n.text.size() > 9)
      fail(node, ErrorKind::Parse, "expected numeral, found '" + ar_.to_text(node) + "'");
    return static_cast<unsigned>(std::stoul(n.text));
  }

  // ---- sorts

  Sort sort(std::uint32_t node) {
    const SNode &n = ar_[node];
    if (n.kind == SKind::Symbol) {
      if (n.text == "Bool")
        return s_.bool_sort();
      auto it = sorts_.find(n.text);
      if (it != sorts_.end())
        return it->second;
      if (open_sorts_)
        return s_.uninterpreted_sort(n.text);
      fail(node, ErrorKind::UnsupportedSymbol, "unsupported sort '" + n.text + "'");
    }
    if (n.kind == SKind::List && n.items.size() == 3 && ar_.is_symbol(n.items[0], "_") &&
        ar_.is_symbol(n.items[1], "BitVec")) {
      const unsigned w = numeral(n.items[2]);
      if (w == 0)
        fail(node, ErrorKind::Sort, "bitvector width must be positive");
      if (w > kMaxBitWidth)
        fail(node, ErrorKind::UnsupportedStructure,
             "bitvector width " + std::to_string(w) + " exceeds the supported maximum of 64");
      return s_.bv_sort(w);
    }
    if (n.kind == SKind::List && n.items.size() == 3 && ar_.is_symbol(n.items[0], "Array"))
      return s_.array_sort(sort(n.items[1]), sort(n.items[2]));
    fail(node, ErrorKind::UnsupportedSymbol, "unsupported sort '" + ar_.to_text(node) + "'");
  }

  // ---- scopes

  Term bind(Frame &f, const std::string &name, Sort srt) {
    std::string actual = name;
    auto sc = scope_.find(name);
    const bool shadowing = sc != scope_.end() && !sc->second.empty();
    if (shadowing || s_.symbols().declared(name) || macros_.count(name))
      actual = s_.symbols().fresh(name);
    bound_names_.insert(name);
    bound_names_.insert(actual);
    Term v = s_.mk_var(actual, srt);
    f.scoped.push_back(name);
    f.binders.push_back(v);
    return v;
  }

  void push_scope(Frame &f) {
    for (std::size_t i = 0; i < f.scoped.size(); ++i)
      scope_[f.scoped[i]].push_back(f.binders[i]);
  }

  void pop_scope(Frame &f) {
    for (const auto &name : f.scoped)
      scope_[name].pop_back();
  }

  // ---- terms

  Term bv_literal(std::uint32_t node) {
    const SNode &n = ar_[node];
    const bool hex = n.kind == SKind::Hex;
    const std::size_t width = n.text.size() * (hex ? 4 : 1);
    if (width > kMaxBitWidth)
      fail(node, ErrorKind::UnsupportedStructure,
           "bitvector literal of width " + std::to_string(width) + " exceeds 64 bits");
    std::uint64_t v = std::stoull(n.text, nullptr, hex ? 16 : 2);
    return s_.mk_bv(v, static_cast<unsigned>(width));
  }

  std::optional<Term> atom(std::uint32_t node) {
    const SNode &n = ar_[node];
    switch (n.kind) {
    case SKind::Hex:
    case SKind::Binary:
      return bv_literal(node);
    case SKind::Symbol: {
      auto sc = scope_.find(n.text);
      if (sc != scope_.end() && !sc->second.empty())
        return sc->second.back();
      if (!n.quoted && n.text == "true")
        return s_.mk_true();
      if (!n.quoted && n.text == "false")
        return s_.mk_false();
      if (const FunSig *sig = s_.symbols().lookup(n.text)) {
        if (!sig->domain.empty())
          fail(node, ErrorKind::Sort, "function '" + n.text + "' used without arguments");
        return s_.mk_var(n.text, sig->range);
      }
      auto m = macros_.find(n.text);
      if (m != macros_.end() && m->second.params.empty())
        return m->second.body;
      if (kUnsupported.count(n.text))
        fail(node, ErrorKind::UnsupportedSymbol, "unsupported symbol '" + n.text + "'");
      fail(node, ErrorKind::UnboundSymbol, "unknown symbol '" + n.text + "'");
    }
    case SKind::Numeral:
      fail(node, ErrorKind::UnsupportedSymbol,
           "numeral '" + n.text + "' is not a term in bitvector logics");
    case SKind::List:
      if (n.items.size() == 3 && ar_.is_symbol(n.items[0], "_") &&
          ar_[n.items[1]].kind == SKind::Symbol && ar_[n.items[1]].text.rfind("bv", 0) == 0) {
        const std::string digits = ar_[n.items[1]].text.substr(2);
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit))
          fail(node, ErrorKind::UnsupportedSymbol, "unsupported term '" + ar_.to_text(node) + "'");
        const unsigned w = numeral(n.items[2]);
        if (w == 0 || w > kMaxBitWidth)
          fail(node, ErrorKind::UnsupportedStructure,
               "bitvector width " + std::to_string(w) + " out of range 1..64");
        return s_.mk_bv(parse_u64(digits), w);
      }
      if (n.items.empty())
        fail(node, ErrorKind::Parse, "empty application '()'");
      return std::nullopt;
    default:
      fail(node, ErrorKind::Parse, "unexpected '" + ar_.to_text(node) + "' in term position");
    }
  }

  // Sets up a frame for a list node. Handles binder scoping immediately when
  // no child needs evaluating first.
  Frame open(std::uint32_t node) {
    const SNode &n = ar_[node];
    Frame f;
    f.node = node;
    const std::uint32_t head = n.items[0];
    const SNode &h = ar_[head];
    if (h.kind == SKind::Symbol) {
      if (!h.quoted && h.text == "let") {
        const SNode &bs = list(node, 3, "(let (bindings) body)");
        const SNode &bl = list(bs.items[1], 1, "let bindings");
        f.kind = Frame::Let;
        for (std::uint32_t b : bl.items)
          f.todo.push_back(list(b, 2, "(name term) binding").items[1]);
        return f;
      }
      if (!h.quoted && (h.text == "forall" || h.text == "exists")) {
        const SNode &qs = list(node, 3, "(quantifier (vars) body)");
        const SNode &vl = list(qs.items[1], 1, "sorted variable list");
        f.kind = Frame::Quant;
        f.op = h.text == "forall" ? Op::Forall : Op::Exists;
        std::unordered_set<std::string> seen;
        for (std::uint32_t v : vl.items) {
          const SNode &sv = list(v, 2, "(name sort)");
          std::string name = symbol(sv.items[0], "variable name");
          if (!seen.insert(name).second)
            fail(v, ErrorKind::Parse, "variable '" + name + "' bound twice");
          bind(f, name, sort(sv.items[1]));
        }
        push_scope(f);
        f.todo.push_back(qs.items[2]);
        return f;
      }
      if (!h.quoted && h.text == "!") {
        list(node, 2, "(! term attributes)");
        f.kind = Frame::Named;
        f.todo.push_back(n.items[1]);
        return f;
      }
      f.fun = h.text;
      for (std::size_t i = 1; i < n.items.size(); ++i)
        f.todo.push_back(n.items[i]);
      return f;
    }
    if (h.kind == SKind::List && h.items.size() >= 2 && ar_.is_symbol(h.items[0], "_")) {
      const std::string name = symbol(h.items[1]);
      auto op = op_from_name(name);
      if (!op || !is_indexed(*op))
        fail(head, ErrorKind::UnsupportedSymbol, "unsupported indexed symbol '" + name + "'");
      for (std::size_t i = 2; i < h.items.size(); ++i)
        f.params.push_back(numeral(h.items[i]));
      f.op = op;
      f.fun = name;
    } else if (h.kind == SKind::List && h.items.size() == 3 && ar_.is_symbol(h.items[0], "as") &&
               ar_.is_symbol(h.items[1], "const")) {
      f.op = Op::ConstArray;
      f.as_const = sort(h.items[2]);
      f.fun = "const";
    } else {
      fail(head, ErrorKind::UnsupportedSymbol,
           "unsupported function head '" + ar_.to_text(head) + "'");
    }
    for (std::size_t i = 1; i < n.items.size(); ++i)
      f.todo.push_back(n.items[i]);
    return f;
  }

  // Returns the frame's value, or nullopt when more children were scheduled.
  std::optional<Term> close(Frame &f) {
    const SNode &n = ar_[f.node];
    switch (f.kind) {
    case Frame::Let: {
      if (f.phase == 0) {
        const SNode &bl = ar_[n.items[1]];
        std::unordered_set<std::string> seen;
        for (std::size_t i = 0; i < bl.items.size(); ++i) {
          const SNode &b = ar_[bl.items[i]];
          std::string name = symbol(b.items[0], "let variable");
          if (!seen.insert(name).second)
            fail(bl.items[i], ErrorKind::Parse, "let variable '" + name + "' bound twice");
          bind(f, name, s_.sort(f.vals[i]));
        }
        push_scope(f);
        f.phase = 1;
        f.todo.push_back(n.items[2]);
        return std::nullopt;
      }
      pop_scope(f);
      std::vector<std::pair<Term, Term>> bindings;
      for (std::size_t i = 0; i < f.binders.size(); ++i)
        bindings.emplace_back(f.binders[i], f.vals[i]);
      return at(f.node, [&] { return s_.mk_let(bindings, f.vals.back()); });
    }
    case Frame::Quant:
      pop_scope(f);
      return at(f.node, [&] { return s_.mk_quant(*f.op, f.binders, f.vals.back()); });
    case Frame::Named: {
      for (std::size_t i = 2; i < n.items.size(); ++i) {
        const SNode &k = ar_[n.items[i]];
        if (k.kind != SKind::Keyword)
          fail(n.items[i], ErrorKind::Parse, "expected attribute keyword");
        if (k.text == ":named") {
          if (i + 1 >= n.items.size())
            fail(n.items[i], ErrorKind::Parse, ":named needs a symbol");
          last_name_ = symbol(n.items[++i]);
        } else if (i + 1 < n.items.size() && ar_[n.items[i + 1]].kind != SKind::Keyword) {
          ++i; // :pattern and friends carry a value we ignore
        }
      }
      return f.vals[0];
    }
    case Frame::App:
      return at(f.node, [&] { return apply(f); });
    }
    return std::nullopt;
  }

  Term apply(Frame &f) {
    auto &args = f.vals;
    if (f.op == Op::ConstArray) {
      if (args.size() != 1)
        throw Error(ErrorKind::Sort, "'as const' takes one argument");
      return s_.mk_const_array(f.as_const, args[0]);
    }
    if (f.op) // indexed
      return s_.mk(*f.op, args, f.params);

    if (auto m = macros_.find(f.fun); m != macros_.end()) {
      const Macro &mac = m->second;
      if (mac.params.size() != args.size())
        throw Error(ErrorKind::Sort, "sort mismatch: '" + f.fun + "' applied to " +
                                         std::to_string(args.size()) + " arguments, expected " +
                                         std::to_string(mac.params.size()));
      TermMap<Term> sub;
      for (std::size_t i = 0; i < args.size(); ++i)
        sub.emplace(mac.params[i], args[i]);
      return substitute(s_, mac.body, sub);
    }
    if (s_.symbols().declared(f.fun))
      return s_.mk_apply(f.fun, args);

    auto op = op_from_name(f.fun);
    if (!op || !plain_op(*op)) {
      if (kUnsupported.count(f.fun) || op)
        throw Error(ErrorKind::UnsupportedSymbol, "unsupported symbol '" + f.fun + "'");
      throw Error(ErrorKind::UnboundSymbol, "unknown function '" + f.fun + "'");
    }
    switch (*op) {
    case Op::And:
    case Op::Or:
      if (args.empty())
        return s_.mk_bool(*op == Op::And);
      if (args.size() == 1) {
        if (!s_.is_bool(s_.sort(args[0])))
          throw Error(ErrorKind::Sort, "sort mismatch: '" + f.fun + "' argument 1 has sort " +
                                           s_.to_string(s_.sort(args[0])) + ", expected Bool");
        return args[0];
      }
      return s_.mk(*op, args);
    case Op::Eq: {
      if (args.size() <= 2)
        return s_.mk(Op::Eq, args);
      std::vector<Term> eqs;
      for (std::size_t i = 0; i + 1 < args.size(); ++i)
        eqs.push_back(s_.mk(Op::Eq, {args[i], args[i + 1]}));
      return s_.mk(Op::And, eqs);
    }
    case Op::Implies: {
      if (args.size() < 2)
        return s_.mk(Op::Implies, args);
      Term acc = args.back();
      for (std::size_t i = args.size() - 1; i-- > 0;)
        acc = s_.mk(Op::Implies, {args[i], acc});
      return acc;
    }
    default:
      if (left_assoc(*op) && args.size() > 2) {
        Term acc = s_.mk(*op, {args[0], args[1]});
        for (std::size_t i = 2; i < args.size(); ++i)
          acc = s_.mk(*op, {acc, args[i]});
        return acc;
      }
      return s_.mk(*op, args);
    }
  }

  Term term(std::uint32_t root) {
    if (auto v = atom(root))
      return *v;
    std::vector<Frame> st;
    st.push_back(open(root));
    for (;;) {
      Frame &f = st.back();
      if (f.next < f.todo.size()) {
        const std::uint32_t child = f.todo[f.next++];
        if (auto v = atom(child))
          f.vals.push_back(*v);
        else
          st.push_back(open(child)); // invalidates f
        continue;
      }
      std::optional<Term> r = close(f);
      if (!r)
        continue;
      st.pop_back();
      if (st.empty())
        return *r;
      st.back().vals.push_back(*r);
    }
  }

  // ---- commands

  void check_new_symbol(std::uint32_t node, const std::string &name) {
    if (s_.symbols().declared(name) || macros_.count(name))
      fail(node, ErrorKind::InvalidArgument, "symbol '" + name + "' already declared");
    if (bound_names_.count(name))
      fail(node, ErrorKind::UnsupportedStructure,
           "symbol '" + name + "' declared after being used as a bound variable");
  }

  void command(std::uint32_t cmd, Script &out) {
    const SNode &c = list(cmd, 1, "command");
    const std::string name = symbol(c.items[0], "command name");
    auto arg = [&](std::size_t i) {
      if (i >= c.items.size())
        fail(cmd, ErrorKind::Parse, "'" + name + "' is missing arguments");
      return c.items[i];
    };

    if (name == "set-logic") {
      out.logic = symbol(arg(1), "logic name");
      if (!supported_logic(out.logic))
        fail(c.items[1], ErrorKind::UnsupportedSymbol, "unsupported logic '" + out.logic + "'");
    } else if (name == "set-info" || name == "set-option") {
      const SNode &k = ar_[arg(1)];
      if (k.kind != SKind::Keyword)
        fail(c.items[1], ErrorKind::Parse, "expected keyword");
      std::string value = c.items.size() > 2 ? ar_.to_text(c.items[2]) : "";
      (name == "set-info" ? out.info : out.options).emplace_back(k.text, std::move(value));
    } else if (name == "declare-sort") {
      const std::string sname = symbol(arg(1), "sort name");
      if (c.items.size() > 2 && numeral(c.items[2]) != 0)
        fail(c.items[2], ErrorKind::UnsupportedStructure, "parametric sorts are not supported");
      if (sname == "Bool" || sorts_.count(sname))
        fail(c.items[1], ErrorKind::InvalidArgument, "sort '" + sname + "' already declared");
      sorts_[sname] = s_.uninterpreted_sort(sname);
      out.sorts.push_back(sname);
    } else if (name == "declare-fun" || name == "declare-const") {
      const std::string fname = symbol(arg(1), "function name");
      check_new_symbol(c.items[1], fname);
      FunSig sig;
      if (name == "declare-fun") {
        const SNode &dom = ar_[arg(2)];
        if (dom.kind != SKind::List)
          fail(c.items[2], ErrorKind::Parse, "expected argument sort list");
        for (std::uint32_t d : dom.items)
          sig.domain.push_back(sort(d));
        sig.range = sort(arg(3));
      } else {
        sig.range = sort(arg(2));
      }
      s_.symbols().declare(fname, sig);
      out.decls.push_back({fname, std::move(sig)});
    } else if (name == "define-fun") {
      const std::string fname = symbol(arg(1), "function name");
      check_new_symbol(c.items[1], fname);
      const SNode &ps = ar_[arg(2)];
      if (ps.kind != SKind::List)
        fail(c.items[2], ErrorKind::Parse, "expected parameter list");
      Frame scope;
      scope.node = cmd;
      for (std::uint32_t p : ps.items) {
        const SNode &sv = list(p, 2, "(name sort)");
        bind(scope, symbol(sv.items[0], "parameter name"), sort(sv.items[1]));
      }
      const Sort range = sort(arg(3));
      push_scope(scope);
      Term body = term(arg(4));
      pop_scope(scope);
      if (s_.sort(body) != range)
        fail(c.items[4], ErrorKind::Sort,
             "sort mismatch: body of '" + fname + "' has sort " + s_.to_string(s_.sort(body)) +
                 ", expected " + s_.to_string(range));
      macros_[fname] = Macro{scope.binders, body};
      s_.symbols().reserve(fname);
    } else if (name == "assert") {
      last_name_.clear();
      Term t = term(arg(1));
      if (!s_.is_bool(s_.sort(t)))
        fail(c.items[1], ErrorKind::Sort,
             "sort mismatch: assertion has sort " + s_.to_string(s_.sort(t)) + ", expected Bool");
      out.assertions.push_back({t, last_name_});
      last_name_.clear();
    } else if (name == "check-sat" || name == "get-model" || name == "exit") {
      out.commands.push_back(name);
    } else {
      fail(c.items[0], ErrorKind::UnsupportedSymbol, "unsupported command '" + name + "'");
    }
  }

  TermStore &s_;
  bool open_sorts_;
  SExprArena ar_;
  std::unordered_map<std::string, std::vector<Term>> scope_;
  std::unordered_set<std::string> bound_names_;
  std::unordered_map<std::string, Macro> macros_;
  std::unordered_map<std::string, Sort> sorts_;
  std::string last_name_;
};

} // namespace

bool supported_logic(std::string_view logic) { return kLogics.count(logic) != 0; }

std::string Script::get_info(std::string_view key) const {
  for (const auto &[k, v] : info)
    if (k == key)
      return v;
  return {};
}

void Script::set_info(const std::string &key, const std::string &value) {
  for (auto &[k, v] : info)
    if (k == key) {
      v = value;
      return;
    }
  info.emplace_back(key, value);
}

Script parse_script(TermStore &store, std::string_view text) {
  return Parser(store).script(text);
}

Term parse_term(TermStore &store, std::string_view text, std::span<const Term> bound) {
  return Parser(store, true).single_term(text, bound);
}

Sort parse_sort(TermStore &store, std::string_view text) {
  return Parser(store, true).single_sort(text);
}

Term conjoin_assertions(TermStore &store, const Script &script) {
  std::vector<Term> parts;
  for (const auto &a : script.assertions)
    if (!store.is_true(a.term))
      parts.push_back(a.term);
  if (parts.empty())
    return store.mk_true();
  if (parts.size() == 1)
    return parts[0];
  return store.mk(Op::And, parts);
}

} // namespace qsic
