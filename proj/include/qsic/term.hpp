#pragma once

// Hash-consed many-sorted terms over booleans, bitvectors, arrays and
// uninterpreted functions.
//
// A TermStore owns every sort and term node. Sort and Term are 32-bit handles
// into that store; two handles are equal iff the nodes are structurally equal.
// A store is confined to one pipeline and is not synchronised; read-only use
// of a store that is no longer mutated is safe from several threads.

#include "qsic/error.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace qsic {

inline constexpr unsigned kMaxBitWidth = 64;

struct Sort {
  std::uint32_t id = UINT32_MAX;

  bool valid() const { return id != UINT32_MAX; }
  friend bool operator==(Sort, Sort) = default;
  friend auto operator<=>(Sort, Sort) = default;
};

struct Term {
  std::uint32_t id = UINT32_MAX;

  bool valid() const { return id != UINT32_MAX; }
  explicit operator bool() const { return valid(); }
  friend bool operator==(Term, Term) = default;
  friend auto operator<=>(Term, Term) = default;
};

struct TermHash {
  std::size_t operator()(Term t) const noexcept { return std::hash<std::uint32_t>{}(t.id); }
};

using TermSet = std::unordered_set<Term, TermHash>;
template <class V> using TermMap = std::unordered_map<Term, V, TermHash>;

enum class SortKind : std::uint8_t { Bool, BitVec, Array, Uninterpreted };

enum class Op : std::uint8_t {
  // leaves
  Const,  // Bool or BitVec literal, value in Node::value
  Var,    // named constant or bound variable
  // structure
  ConstArray, // ((as const (Array I E)) v)
  Apply,      // uninterpreted function application
  Let,        // kids: v1 e1 v2 e2 ... body
  Forall,     // kids: v1 ... vk body
  Exists,
  // core
  Not, And, Or, Implies, Xor, Eq, Distinct, Ite,
  // bitvectors
  BvNot, BvNeg,
  BvAnd, BvOr, BvXor, BvNand, BvNor, BvXnor,
  BvAdd, BvSub, BvMul, BvUdiv, BvUrem, BvSdiv, BvSrem, BvSmod,
  BvShl, BvLshr, BvAshr, BvComp,
  Concat, Extract, ZeroExtend, SignExtend, RotateLeft, RotateRight, Repeat,
  BvUlt, BvUle, BvUgt, BvUge, BvSlt, BvSle, BvSgt, BvSge,
  // arrays
  Select, Store,
};

// SMT-LIB spelling of an operator ("bvadd", "select", ...). Leaves and
// binders return their keyword ("let", "forall").
std::string_view op_name(Op op);
std::optional<Op> op_from_name(std::string_view name);

bool is_quantifier(Op op);
bool is_indexed(Op op); // Extract, ZeroExtend, ...

struct FunSig {
  std::vector<Sort> domain;
  Sort range;
};

// Declared symbols plus a fresh-name generator. Fresh names never collide
// with a declared name or any name the store has seen before.
class SymbolTable {
public:
  void declare(const std::string &name, FunSig sig);
  const FunSig *lookup(std::string_view name) const;
  bool declared(std::string_view name) const { return lookup(name) != nullptr; }
  void undeclare(const std::string &name) { decls_.erase(name); }

  // Returns base itself when unused, otherwise base!N for the first free N.
  std::string fresh(std::string_view base);
  void reserve(std::string_view name) { used_.emplace(name); }
  bool used(std::string_view name) const { return used_.count(std::string(name)) != 0; }

private:
  std::map<std::string, FunSig, std::less<>> decls_;
  std::unordered_set<std::string> used_;
  std::unordered_map<std::string, std::uint64_t> counters_;
};

class TermStore {
public:
  TermStore();
  TermStore(const TermStore &) = delete;
  TermStore &operator=(const TermStore &) = delete;

  // sorts
  Sort bool_sort() const { return bool_sort_; }
  Sort bv_sort(unsigned width);
  Sort array_sort(Sort index, Sort element);
  Sort uninterpreted_sort(std::string_view name);

  SortKind kind(Sort s) const { return sorts_[s.id].kind; }
  bool is_bool(Sort s) const { return kind(s) == SortKind::Bool; }
  bool is_bv(Sort s) const { return kind(s) == SortKind::BitVec; }
  bool is_array(Sort s) const { return kind(s) == SortKind::Array; }
  unsigned width(Sort s) const { return sorts_[s.id].width; }
  Sort index_sort(Sort s) const { return sorts_[s.id].index; }
  Sort element_sort(Sort s) const { return sorts_[s.id].element; }
  std::string_view sort_name(Sort s) const { return sorts_[s.id].name; }
  std::string to_string(Sort s) const;

  // leaves
  Term mk_true() const { return true_; }
  Term mk_false() const { return false_; }
  Term mk_bool(bool b) const { return b ? true_ : false_; }
  // value is reduced modulo 2^width
  Term mk_bv(std::uint64_t value, unsigned width);
  Term mk_var(std::string_view name, Sort sort);
  Term mk_const_array(Sort array, Term value);

  // Generic sort-checked constructor. params holds the indices of indexed
  // operators (extract hi lo, zero_extend k, ...). Throws Error(Sort) naming
  // the operator and the offending argument position.
  Term mk(Op op, std::span<const Term> kids, std::span<const unsigned> params = {});
  Term mk(Op op, std::initializer_list<Term> kids) {
    return mk(op, std::span<const Term>(kids.begin(), kids.size()));
  }
  Term mk_apply(std::string_view fun, std::span<const Term> args);
  Term mk_let(std::span<const std::pair<Term, Term>> bindings, Term body);
  Term mk_quant(Op kind, std::span<const Term> vars, Term body);

  // accessors
  Op op(Term t) const { return nodes_[t.id].op; }
  Sort sort(Term t) const { return nodes_[t.id].sort; }
  std::span<const Term> kids(Term t) const { return nodes_[t.id].kids; }
  Term kid(Term t, std::size_t i) const { return nodes_[t.id].kids[i]; }
  std::size_t num_kids(Term t) const { return nodes_[t.id].kids.size(); }
  std::uint64_t value(Term t) const { return nodes_[t.id].value; }
  std::string_view name(Term t) const { return names_[nodes_[t.id].name]; }
  unsigned param(Term t, std::size_t i) const { return nodes_[t.id].params[i]; }
  std::span<const unsigned> params(Term t) const;

  bool is_const(Term t) const { return op(t) == Op::Const; }
  bool is_true(Term t) const { return t == true_; }
  bool is_false(Term t) const { return t == false_; }
  bool is_var(Term t) const { return op(t) == Op::Var; }

  // binder helpers
  std::span<const Term> bound_vars(Term quant) const;
  Term body(Term binder) const { return nodes_[binder.id].kids.back(); }

  std::size_t num_nodes() const { return nodes_.size(); }

  SymbolTable &symbols() { return symbols_; }
  const SymbolTable &symbols() const { return symbols_; }

  // Rebuilds t's node with new children, keeping op, sort and indices.
  Term rebuild(Term t, std::span<const Term> kids);

private:
  struct SortNode {
    SortKind kind;
    unsigned width = 0;
    Sort index, element;
    std::string name;
  };
  struct Node {
    Op op;
    Sort sort;
    std::uint32_t name = 0;
    std::uint64_t value = 0;
    std::array<unsigned, 2> params{0, 0};
    std::vector<Term> kids;
    std::size_t hash = 0; // set by intern
  };
  static std::size_t hash_node(const Node &n);
  struct NodeHash {
    const TermStore *store;
    std::size_t operator()(std::uint32_t id) const;
  };
  struct NodeEq {
    const TermStore *store;
    bool operator()(std::uint32_t a, std::uint32_t b) const;
  };
  struct SortHash {
    const TermStore *store;
    std::size_t operator()(std::uint32_t id) const;
  };
  struct SortEq {
    const TermStore *store;
    bool operator()(std::uint32_t a, std::uint32_t b) const;
  };

  Sort intern_sort(SortNode node);
  Term intern(Node node);
  std::uint32_t intern_name(std::string_view name);
  Sort check_sort(Op op, std::span<const Term> kids, std::span<const unsigned> params);

  std::vector<SortNode> sorts_;
  std::unordered_set<std::uint32_t, SortHash, SortEq> sort_table_;
  std::vector<Node> nodes_;
  std::unordered_set<std::uint32_t, NodeHash, NodeEq> node_table_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> name_ids_;
  SymbolTable symbols_;
  Sort bool_sort_;
  Term true_, false_;
};

} // namespace qsic
