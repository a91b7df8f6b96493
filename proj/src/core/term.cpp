#include "qsic/term.hpp"

#include "qsic/bv.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace qsic {

const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::Parse: return "parse-error";
  case ErrorKind::Sort: return "sort-mismatch";
  case ErrorKind::UnsupportedSymbol: return "unsupported-symbol";
  case ErrorKind::UnsupportedStructure: return "unsupported-structure";
  case ErrorKind::UnboundSymbol: return "unbound-symbol";
  case ErrorKind::ModelShape: return "model-shape";
  case ErrorKind::MissingEntry: return "missing-entry";
  case ErrorKind::IncompleteModel: return "incomplete-model";
  case ErrorKind::MalformedRule: return "malformed-rule";
  case ErrorKind::SolverNotFound: return "solver-not-found";
  case ErrorKind::Io: return "io-error";
  case ErrorKind::InvalidArgument: return "invalid-argument";
  case ErrorKind::NoArraySymbols: return "no-array-symbols";
  case ErrorKind::Internal: return "internal-error";
  }
  return "error";
}

namespace {

struct OpInfo {
  Op op;
  std::string_view name;
};

constexpr std::array kOps = {
    OpInfo{Op::Const, "<const>"},      OpInfo{Op::Var, "<var>"},
    OpInfo{Op::ConstArray, "const"},   OpInfo{Op::Apply, "<apply>"},
    OpInfo{Op::Let, "let"},            OpInfo{Op::Forall, "forall"},
    OpInfo{Op::Exists, "exists"},      OpInfo{Op::Not, "not"},
    OpInfo{Op::And, "and"},            OpInfo{Op::Or, "or"},
    OpInfo{Op::Implies, "=>"},         OpInfo{Op::Xor, "xor"},
    OpInfo{Op::Eq, "="},               OpInfo{Op::Distinct, "distinct"},
    OpInfo{Op::Ite, "ite"},            OpInfo{Op::BvNot, "bvnot"},
    OpInfo{Op::BvNeg, "bvneg"},        OpInfo{Op::BvAnd, "bvand"},
    OpInfo{Op::BvOr, "bvor"},          OpInfo{Op::BvXor, "bvxor"},
    OpInfo{Op::BvNand, "bvnand"},      OpInfo{Op::BvNor, "bvnor"},
    OpInfo{Op::BvXnor, "bvxnor"},      OpInfo{Op::BvAdd, "bvadd"},
    OpInfo{Op::BvSub, "bvsub"},        OpInfo{Op::BvMul, "bvmul"},
    OpInfo{Op::BvUdiv, "bvudiv"},      OpInfo{Op::BvUrem, "bvurem"},
    OpInfo{Op::BvSdiv, "bvsdiv"},      OpInfo{Op::BvSrem, "bvsrem"},
    OpInfo{Op::BvSmod, "bvsmod"},      OpInfo{Op::BvShl, "bvshl"},
    OpInfo{Op::BvLshr, "bvlshr"},      OpInfo{Op::BvAshr, "bvashr"},
    OpInfo{Op::BvComp, "bvcomp"},      OpInfo{Op::Concat, "concat"},
    OpInfo{Op::Extract, "extract"},    OpInfo{Op::ZeroExtend, "zero_extend"},
    OpInfo{Op::SignExtend, "sign_extend"}, OpInfo{Op::RotateLeft, "rotate_left"},
    OpInfo{Op::RotateRight, "rotate_right"}, OpInfo{Op::Repeat, "repeat"},
    OpInfo{Op::BvUlt, "bvult"},        OpInfo{Op::BvUle, "bvule"},
    OpInfo{Op::BvUgt, "bvugt"},        OpInfo{Op::BvUge, "bvuge"},
    OpInfo{Op::BvSlt, "bvslt"},        OpInfo{Op::BvSle, "bvsle"},
    OpInfo{Op::BvSgt, "bvsgt"},        OpInfo{Op::BvSge, "bvsge"},
    OpInfo{Op::Select, "select"},      OpInfo{Op::Store, "store"},
};

std::size_t num_params(Op op) {
  switch (op) {
  case Op::Extract: return 2;
  case Op::ZeroExtend: case Op::SignExtend: case Op::RotateLeft:
  case Op::RotateRight: case Op::Repeat:
    return 1;
  default:
    return 0;
  }
}

inline void hash_combine(std::size_t &seed, std::size_t v) {
  seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

} // namespace

std::string_view op_name(Op op) {
  for (const auto &info : kOps)
    if (info.op == op)
      return info.name;
  return "?";
}

std::optional<Op> op_from_name(std::string_view name) {
  for (const auto &info : kOps)
    if (info.name == name && info.name.front() != '<')
      return info.op;
  return std::nullopt;
}

bool is_quantifier(Op op) { return op == Op::Forall || op == Op::Exists; }

bool is_indexed(Op op) { return num_params(op) != 0; }

// ---------------------------------------------------------------------------
// SymbolTable

void SymbolTable::declare(const std::string &name, FunSig sig) {
  decls_[name] = std::move(sig);
  used_.insert(name);
}

const FunSig *SymbolTable::lookup(std::string_view name) const {
  auto it = decls_.find(name);
  return it == decls_.end() ? nullptr : &it->second;
}

std::string SymbolTable::fresh(std::string_view base) {
  std::string b(base);
  if (!used_.count(b)) {
    used_.insert(b);
    return b;
  }
  auto &n = counters_[b];
  for (;;) {
    std::string candidate = b + "!" + std::to_string(++n);
    if (!used_.count(candidate)) {
      used_.insert(candidate);
      return candidate;
    }
  }
}

// ---------------------------------------------------------------------------
// TermStore

std::size_t TermStore::SortHash::operator()(std::uint32_t id) const {
  const auto &s = store->sorts_[id];
  std::size_t h = static_cast<std::size_t>(s.kind);
  hash_combine(h, s.width);
  hash_combine(h, s.index.id);
  hash_combine(h, s.element.id);
  hash_combine(h, std::hash<std::string>{}(s.name));
  return h;
}

bool TermStore::SortEq::operator()(std::uint32_t a, std::uint32_t b) const {
  const auto &x = store->sorts_[a];
  const auto &y = store->sorts_[b];
  return x.kind == y.kind && x.width == y.width && x.index == y.index &&
         x.element == y.element && x.name == y.name;
}

std::size_t TermStore::NodeHash::operator()(std::uint32_t id) const { return store->nodes_[id].hash; }

std::size_t TermStore::hash_node(const Node &n) {
  std::size_t h = static_cast<std::size_t>(n.op);
  hash_combine(h, n.sort.id);
  hash_combine(h, n.name);
  hash_combine(h, std::hash<std::uint64_t>{}(n.value));
  hash_combine(h, n.params[0]);
  hash_combine(h, n.params[1]);
  for (Term k : n.kids)
    hash_combine(h, k.id);
  return h;
}

bool TermStore::NodeEq::operator()(std::uint32_t a, std::uint32_t b) const {
  const auto &x = store->nodes_[a];
  const auto &y = store->nodes_[b];
  return x.hash == y.hash && x.op == y.op && x.sort == y.sort && x.name == y.name && x.value == y.value &&
         x.params == y.params && x.kids == y.kids;
}

TermStore::TermStore()
    : sort_table_(16, SortHash{this}, SortEq{this}),
      node_table_(1024, NodeHash{this}, NodeEq{this}) {
  names_.emplace_back();
  name_ids_.emplace("", 0);
  bool_sort_ = intern_sort(SortNode{SortKind::Bool, 0, {}, {}, {}});
  false_ = intern(Node{Op::Const, bool_sort_, 0, 0, {0, 0}, {}});
  true_ = intern(Node{Op::Const, bool_sort_, 0, 1, {0, 0}, {}});
}

Sort TermStore::intern_sort(SortNode node) {
  sorts_.push_back(std::move(node));
  const auto id = static_cast<std::uint32_t>(sorts_.size() - 1);
  auto [it, inserted] = sort_table_.insert(id);
  if (!inserted)
    sorts_.pop_back();
  return Sort{*it};
}

Term TermStore::intern(Node node) {
  node.hash = hash_node(node);
  nodes_.push_back(std::move(node));
  const auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
  auto [it, inserted] = node_table_.insert(id);
  if (!inserted)
    nodes_.pop_back();
  return Term{*it};
}

std::uint32_t TermStore::intern_name(std::string_view name) {
  auto it = name_ids_.find(std::string(name));
  if (it != name_ids_.end())
    return it->second;
  names_.emplace_back(name);
  const auto id = static_cast<std::uint32_t>(names_.size() - 1);
  name_ids_.emplace(std::string(name), id);
  symbols_.reserve(name);
  return id;
}

Sort TermStore::bv_sort(unsigned width) {
  if (width == 0 || width > kMaxBitWidth)
    throw Error(ErrorKind::UnsupportedSymbol,
                "bitvector width " + std::to_string(width) + " outside 1.." +
                    std::to_string(kMaxBitWidth));
  return intern_sort(SortNode{SortKind::BitVec, width, {}, {}, {}});
}

Sort TermStore::array_sort(Sort index, Sort element) {
  return intern_sort(SortNode{SortKind::Array, 0, index, element, {}});
}

Sort TermStore::uninterpreted_sort(std::string_view name) {
  return intern_sort(SortNode{SortKind::Uninterpreted, 0, {}, {}, std::string(name)});
}

std::string TermStore::to_string(Sort s) const {
  const auto &n = sorts_[s.id];
  switch (n.kind) {
  case SortKind::Bool: return "Bool";
  case SortKind::BitVec: return "(_ BitVec " + std::to_string(n.width) + ")";
  case SortKind::Array: return "(Array " + to_string(n.index) + " " + to_string(n.element) + ")";
  case SortKind::Uninterpreted: return n.name;
  }
  return "?";
}

std::span<const unsigned> TermStore::params(Term t) const {
  const auto &n = nodes_[t.id];
  return std::span<const unsigned>(n.params.data(), num_params(n.op));
}

std::span<const Term> TermStore::bound_vars(Term quant) const {
  const auto &k = nodes_[quant.id].kids;
  return std::span<const Term>(k.data(), k.size() - 1);
}

Term TermStore::mk_bv(std::uint64_t value, unsigned width) {
  Sort s = bv_sort(width);
  return intern(Node{Op::Const, s, 0, value & bv::mask(width), {0, 0}, {}});
}

Term TermStore::mk_var(std::string_view name, Sort sort) {
  if (name.empty())
    throw Error(ErrorKind::InvalidArgument, "empty variable name");
  return intern(Node{Op::Var, sort, intern_name(name), 0, {0, 0}, {}});
}

Term TermStore::mk_const_array(Sort array, Term value) {
  if (!is_array(array))
    throw Error(ErrorKind::Sort, "sort mismatch: 'as const' needs an array sort, got " +
                                     to_string(array));
  if (sort(value) != element_sort(array))
    throw Error(ErrorKind::Sort, "sort mismatch: 'as const' argument 1 has sort " +
                                     to_string(sort(value)) + ", expected " +
                                     to_string(element_sort(array)));
  return intern(Node{Op::ConstArray, array, 0, 0, {0, 0}, {value}});
}

namespace {

[[noreturn]] void sort_error(const TermStore &s, Op op, std::size_t pos, Sort got,
                             const std::string &expected) {
  throw Error(ErrorKind::Sort, "sort mismatch: '" + std::string(op_name(op)) + "' argument " +
                                   std::to_string(pos + 1) + " has sort " + s.to_string(got) +
                                   ", expected " + expected);
}

[[noreturn]] void arity_error(Op op, std::size_t got, const std::string &expected) {
  throw Error(ErrorKind::Sort, "sort mismatch: '" + std::string(op_name(op)) + "' applied to " +
                                   std::to_string(got) + " arguments, expected " + expected);
}

} // namespace

Sort TermStore::check_sort(Op op, std::span<const Term> kids, std::span<const unsigned> params) {
  auto expect_arity = [&](std::size_t n) {
    if (kids.size() != n)
      arity_error(op, kids.size(), std::to_string(n));
  };
  auto expect_bool = [&](std::size_t i) {
    if (!is_bool(sort(kids[i])))
      sort_error(*this, op, i, sort(kids[i]), "Bool");
  };
  auto expect_bv = [&](std::size_t i) {
    if (!is_bv(sort(kids[i])))
      sort_error(*this, op, i, sort(kids[i]), "a bitvector");
  };
  auto expect_same = [&](std::size_t i, Sort s) {
    if (sort(kids[i]) != s)
      sort_error(*this, op, i, sort(kids[i]), to_string(s));
  };
  if (params.size() != num_params(op))
    throw Error(ErrorKind::Sort, "operator '" + std::string(op_name(op)) + "' expects " +
                                     std::to_string(num_params(op)) + " indices");

  switch (op) {
  case Op::Not:
    expect_arity(1);
    expect_bool(0);
    return bool_sort_;
  case Op::And: case Op::Or: case Op::Xor:
    if (kids.size() < 2)
      arity_error(op, kids.size(), "at least 2");
    for (std::size_t i = 0; i < kids.size(); ++i)
      expect_bool(i);
    return bool_sort_;
  case Op::Implies:
    expect_arity(2);
    expect_bool(0);
    expect_bool(1);
    return bool_sort_;
  case Op::Eq:
    expect_arity(2);
    expect_same(1, sort(kids[0]));
    return bool_sort_;
  case Op::Distinct:
    if (kids.size() < 2)
      arity_error(op, kids.size(), "at least 2");
    for (std::size_t i = 1; i < kids.size(); ++i)
      expect_same(i, sort(kids[0]));
    return bool_sort_;
  case Op::Ite:
    expect_arity(3);
    expect_bool(0);
    expect_same(2, sort(kids[1]));
    return sort(kids[1]);
  case Op::BvNot: case Op::BvNeg:
    expect_arity(1);
    expect_bv(0);
    return sort(kids[0]);
  case Op::BvAnd: case Op::BvOr: case Op::BvXor: case Op::BvNand: case Op::BvNor:
  case Op::BvXnor: case Op::BvAdd: case Op::BvSub: case Op::BvMul: case Op::BvUdiv:
  case Op::BvUrem: case Op::BvSdiv: case Op::BvSrem: case Op::BvSmod: case Op::BvShl:
  case Op::BvLshr: case Op::BvAshr:
    expect_arity(2);
    expect_bv(0);
    expect_same(1, sort(kids[0]));
    return sort(kids[0]);
  case Op::BvComp:
    expect_arity(2);
    expect_bv(0);
    expect_same(1, sort(kids[0]));
    return bv_sort(1);
  case Op::BvUlt: case Op::BvUle: case Op::BvUgt: case Op::BvUge: case Op::BvSlt:
  case Op::BvSle: case Op::BvSgt: case Op::BvSge:
    expect_arity(2);
    expect_bv(0);
    expect_same(1, sort(kids[0]));
    return bool_sort_;
  case Op::Concat:
    expect_arity(2);
    expect_bv(0);
    expect_bv(1);
    return bv_sort(width(sort(kids[0])) + width(sort(kids[1])));
  case Op::Extract: {
    expect_arity(1);
    expect_bv(0);
    const unsigned w = width(sort(kids[0]));
    if (!(params[0] < w && params[0] >= params[1]))
      throw Error(ErrorKind::Sort, "sort mismatch: 'extract' indices " + std::to_string(params[0]) +
                                       " " + std::to_string(params[1]) +
                                       " invalid for width " + std::to_string(w));
    return bv_sort(params[0] - params[1] + 1);
  }
  case Op::ZeroExtend: case Op::SignExtend:
    expect_arity(1);
    expect_bv(0);
    return bv_sort(width(sort(kids[0])) + params[0]);
  case Op::RotateLeft: case Op::RotateRight:
    expect_arity(1);
    expect_bv(0);
    return sort(kids[0]);
  case Op::Repeat:
    expect_arity(1);
    expect_bv(0);
    if (params[0] == 0)
      throw Error(ErrorKind::Sort, "sort mismatch: 'repeat' count must be positive");
    return bv_sort(width(sort(kids[0])) * params[0]);
  case Op::Select: {
    expect_arity(2);
    const Sort a = sort(kids[0]);
    if (!is_array(a))
      sort_error(*this, op, 0, a, "an array");
    expect_same(1, index_sort(a));
    return element_sort(a);
  }
  case Op::Store: {
    expect_arity(3);
    const Sort a = sort(kids[0]);
    if (!is_array(a))
      sort_error(*this, op, 0, a, "an array");
    expect_same(1, index_sort(a));
    expect_same(2, element_sort(a));
    return a;
  }
  default:
    throw Error(ErrorKind::Internal,
                "mk() cannot build '" + std::string(op_name(op)) + "' nodes");
  }
}

Term TermStore::mk(Op op, std::span<const Term> kids, std::span<const unsigned> params) {
  const Sort s = check_sort(op, kids, params);
  Node n{op, s, 0, 0, {0, 0}, std::vector<Term>(kids.begin(), kids.end())};
  for (std::size_t i = 0; i < params.size(); ++i)
    n.params[i] = params[i];
  return intern(std::move(n));
}

Term TermStore::mk_apply(std::string_view fun, std::span<const Term> args) {
  const FunSig *sig = symbols_.lookup(fun);
  if (!sig)
    throw Error(ErrorKind::UnboundSymbol, "unknown function '" + std::string(fun) + "'");
  if (sig->domain.size() != args.size())
    throw Error(ErrorKind::Sort, "sort mismatch: '" + std::string(fun) + "' applied to " +
                                     std::to_string(args.size()) + " arguments, expected " +
                                     std::to_string(sig->domain.size()));
  for (std::size_t i = 0; i < args.size(); ++i)
    if (sort(args[i]) != sig->domain[i])
      throw Error(ErrorKind::Sort, "sort mismatch: '" + std::string(fun) + "' argument " +
                                       std::to_string(i + 1) + " has sort " +
                                       to_string(sort(args[i])) + ", expected " +
                                       to_string(sig->domain[i]));
  if (args.empty())
    return mk_var(fun, sig->range);
  return intern(Node{Op::Apply, sig->range, intern_name(fun), 0, {0, 0},
                     std::vector<Term>(args.begin(), args.end())});
}

Term TermStore::mk_let(std::span<const std::pair<Term, Term>> bindings, Term body) {
  if (bindings.empty())
    return body;
  Node n{Op::Let, sort(body), 0, 0, {0, 0}, {}};
  for (std::size_t i = 0; i < bindings.size(); ++i) {
    const auto &[v, e] = bindings[i];
    if (!is_var(v))
      throw Error(ErrorKind::InvalidArgument, "let binder must be a variable");
    if (sort(v) != sort(e))
      throw Error(ErrorKind::Sort, "sort mismatch: 'let' binding " + std::to_string(i + 1) +
                                       " has sort " + to_string(sort(e)) + ", expected " +
                                       to_string(sort(v)));
    for (std::size_t j = 0; j < i; ++j)
      if (bindings[j].first == v)
        throw Error(ErrorKind::InvalidArgument,
                    "duplicate let binder '" + std::string(name(v)) + "'");
    n.kids.push_back(v);
    n.kids.push_back(e);
  }
  n.kids.push_back(body);
  return intern(std::move(n));
}

Term TermStore::mk_quant(Op kind, std::span<const Term> vars, Term body) {
  if (!is_quantifier(kind))
    throw Error(ErrorKind::InvalidArgument, "mk_quant needs forall or exists");
  if (!is_bool(sort(body)))
    throw Error(ErrorKind::Sort, "sort mismatch: quantifier body has sort " +
                                     to_string(sort(body)) + ", expected Bool");
  if (vars.empty())
    return body;
  Node n{kind, bool_sort_, 0, 0, {0, 0}, {}};
  for (Term v : vars) {
    if (!is_var(v))
      throw Error(ErrorKind::InvalidArgument, "quantified binder must be a variable");
    n.kids.push_back(v);
  }
  n.kids.push_back(body);
  return intern(std::move(n));
}

Term TermStore::rebuild(Term t, std::span<const Term> kids) {
  const Node &old = nodes_[t.id];
  if (std::equal(kids.begin(), kids.end(), old.kids.begin(), old.kids.end()))
    return t;
  switch (old.op) {
  case Op::Const:
  case Op::Var:
    return t;
  case Op::ConstArray:
    return mk_const_array(old.sort, kids[0]);
  case Op::Apply: {
    const std::string fun(name(t));
    return mk_apply(fun, kids);
  }
  case Op::Let: {
    std::vector<std::pair<Term, Term>> b;
    for (std::size_t i = 0; i + 1 < kids.size(); i += 2)
      b.emplace_back(kids[i], kids[i + 1]);
    return mk_let(b, kids.back());
  }
  case Op::Forall:
  case Op::Exists:
    return mk_quant(old.op, kids.first(kids.size() - 1), kids.back());
  default: {
    const auto p = params(t);
    std::array<unsigned, 2> copy{0, 0};
    std::copy(p.begin(), p.end(), copy.begin());
    return mk(old.op, kids, std::span<const unsigned>(copy.data(), p.size()));
  }
  }
}

} // namespace qsic
