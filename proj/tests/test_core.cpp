#include "doctest.h"

#include "qsic/bv.hpp"
#include "qsic/term.hpp"
#include "qsic/term_util.hpp"

#include <algorithm>
#include <random>

using namespace qsic;

namespace {

struct Fig1 {
  TermStore s;
  Sort bv8 = s.bv_sort(8);
  Term a = s.mk_var("a", bv8), b = s.mk_var("b", bv8), x = s.mk_var("x", bv8);
  Term ax = s.mk(Op::BvMul, {a, x});
  Term axb = s.mk(Op::BvAdd, {ax, b});
};

std::vector<std::string> names(const TermStore &s, const std::vector<Term> &ts) {
  std::vector<std::string> out;
  for (Term t : ts)
    out.emplace_back(s.name(t));
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

TEST_CASE("hash-consing returns the same id for equal nodes") {
  Fig1 f;
  CHECK(f.s.mk(Op::BvAdd, {f.a, f.b}) == f.s.mk(Op::BvAdd, {f.a, f.b}));
  CHECK(f.s.mk(Op::BvAdd, {f.a, f.b}) != f.s.mk(Op::BvAdd, {f.b, f.a}));
  CHECK(f.s.mk_bv(0x1ff, 8) == f.s.mk_bv(0xff, 8));
  CHECK(f.s.mk_bv(1, 8) != f.s.mk_bv(1, 4));
}

TEST_CASE("ill-sorted applications are rejected with the argument position") {
  Fig1 f;
  Term p = f.s.mk_var("p", f.s.bool_sort());
  try {
    f.s.mk(Op::BvAdd, {f.a, p});
    FAIL("expected a sort error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::Sort);
    CHECK(std::string(e.what()).find("'bvadd' argument 2") != std::string::npos);
  }
  CHECK_THROWS_AS(f.s.mk(Op::BvAdd, {f.a, f.s.mk_bv(0, 4)}), Error);
  CHECK_THROWS_AS(f.s.mk(Op::Ite, {f.a, f.a, f.b}), Error);
}

TEST_CASE("ite takes the sort of its branches") {
  TermStore s;
  Sort bv4 = s.bv_sort(4);
  Term c = s.mk_var("c", s.bool_sort());
  Term t = s.mk(Op::Ite, {c, s.mk_var("a", bv4), s.mk_var("b", bv4)});
  CHECK(s.sort(t) == bv4);
}

TEST_CASE("size follows the inductive definition") {
  Fig1 f;
  CHECK(size(f.s, f.x) == 1);
  CHECK(size(f.s, f.axb) == 5);
  // tree reading: the shared product counts twice
  Term twice = f.s.mk(Op::BvAdd, {f.ax, f.ax});
  CHECK(size(f.s, twice) == 7);
  CHECK(dag_size(f.s, twice) == 4);
}

TEST_CASE("size of a let never exceeds its expansion") {
  Fig1 f;
  Term v = f.s.mk_var("v", f.bv8);
  std::pair<Term, Term> bind{v, f.axb};
  Term let = f.s.mk_let(std::span(&bind, 1), f.s.mk(Op::BvMul, {v, v}));
  Term expanded = expand_lets(f.s, let);
  CHECK(expanded == f.s.mk(Op::BvMul, {f.axb, f.axb}));
  CHECK(size(f.s, let) == 5 + 3);
  CHECK(size(f.s, let) <= size(f.s, expanded));
}

TEST_CASE("free variables exclude bound occurrences") {
  Fig1 f;
  Term gt = f.s.mk(Op::BvSgt, {f.axb, f.s.mk_bv(0, 8)});
  std::array<Term, 1> xs{f.x};
  Term q = f.s.mk_quant(Op::Forall, xs, gt);
  CHECK(names(f.s, free_vars(f.s, q)) == std::vector<std::string>{"a", "b"});
  CHECK(free_vars(f.s, f.s.mk_bv(0, 8)).empty());

  Term v = f.s.mk_var("v", f.bv8);
  std::pair<Term, Term> bind{v, f.s.mk(Op::BvAdd, {f.a, f.b})};
  Term let = f.s.mk_let(std::span(&bind, 1), f.s.mk(Op::BvAdd, {v, v}));
  CHECK(names(f.s, free_vars(f.s, let)) == std::vector<std::string>{"a", "b"});
}

TEST_CASE("substitution") {
  Fig1 f;
  Term zero = f.s.mk_bv(0, 8);
  CHECK(substitute(f.s, f.axb, TermMap<Term>{{f.x, zero}}) ==
        f.s.mk(Op::BvAdd, {f.s.mk(Op::BvMul, {f.a, zero}), f.b}));

  SUBCASE("bound occurrences are untouched") {
    Term body = f.s.mk(Op::Eq, {f.s.mk(Op::BvAdd, {f.x, f.a}), f.b});
    std::array<Term, 1> xs{f.x};
    Term q = f.s.mk_quant(Op::Forall, xs, body);
    CHECK(substitute(f.s, q, TermMap<Term>{{f.x, f.s.mk_bv(1, 8)}}) == q);
  }
  SUBCASE("simultaneous") {
    Term y = f.s.mk_var("y", f.bv8);
    CHECK(substitute(f.s, f.x, TermMap<Term>{{f.x, y}, {y, f.x}}) == y);
    Term sum = f.s.mk(Op::BvSub, {f.x, y});
    CHECK(substitute(f.s, sum, TermMap<Term>{{f.x, y}, {y, f.x}}) == f.s.mk(Op::BvSub, {y, f.x}));
  }
  SUBCASE("capture avoidance renames the binder") {
    // (forall y. x = y)[x := y] must not capture
    Term y = f.s.mk_var("y", f.bv8);
    std::array<Term, 1> ys{y};
    Term q = f.s.mk_quant(Op::Forall, ys, f.s.mk(Op::Eq, {f.x, y}));
    Term r = substitute(f.s, q, TermMap<Term>{{f.x, y}});
    REQUIRE(f.s.op(r) == Op::Forall);
    Term binder = f.s.bound_vars(r)[0];
    CHECK(binder != y);
    CHECK(f.s.body(r) == f.s.mk(Op::Eq, {y, binder}));
    CHECK(names(f.s, free_vars(f.s, r)) == std::vector<std::string>{"y"});
  }
  SUBCASE("by name") {
    std::unordered_map<std::string, Term> m{{"x", zero}};
    CHECK(substitute(f.s, f.x, m) == zero);
  }
  SUBCASE("sort mismatch") {
    CHECK_THROWS_AS(substitute(f.s, f.axb, TermMap<Term>{{f.x, f.s.mk_true()}}), Error);
  }
}

TEST_CASE("substituting a constant removes exactly that free variable") {
  std::mt19937 rng(7);
  TermStore s;
  Sort bv4 = s.bv_sort(4);
  std::vector<Term> vars;
  for (const char *n : {"p", "q", "r", "x"})
    vars.push_back(s.mk_var(n, bv4));
  const Op ops[] = {Op::BvAdd, Op::BvMul, Op::BvAnd, Op::BvShl, Op::BvSub};
  for (int round = 0; round < 200; ++round) {
    std::vector<Term> pool = vars;
    pool.push_back(s.mk_bv(rng() % 16, 4));
    for (int i = 0; i < 6; ++i)
      pool.push_back(s.mk(ops[rng() % 5], {pool[rng() % pool.size()], pool[rng() % pool.size()]}));
    Term t = pool.back();
    Term c = s.mk_bv(rng() % 16, 4);
    auto before = free_vars(s, t);
    auto after = free_vars(s, substitute(s, t, TermMap<Term>{{vars[3], c}}));
    std::erase(before, vars[3]);
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    CHECK(before == after);
  }
}

TEST_CASE("structurally equal random terms share ids and unequal ones do not") {
  std::mt19937 rng(11);
  TermStore s;
  Sort bv4 = s.bv_sort(4);
  auto gen = [&](auto &self, std::mt19937 &r, int depth) -> Term {
    if (depth == 0 || r() % 3 == 0)
      return r() % 2 ? s.mk_var(std::string(1, char('a' + r() % 3)), bv4) : s.mk_bv(r() % 16, 4);
    const Op ops[] = {Op::BvAdd, Op::BvMul, Op::BvXor};
    Op op = ops[r() % 3];
    Term l = self(self, r, depth - 1);
    Term rr = self(self, r, depth - 1);
    return s.mk(op, {l, rr});
  };
  auto render = [&](auto &self, Term t) -> std::string {
    if (s.is_const(t))
      return std::to_string(s.value(t));
    if (s.is_var(t))
      return std::string(s.name(t));
    std::string out = "(" + std::string(op_name(s.op(t)));
    for (Term k : s.kids(t))
      out += " " + self(self, k);
    return out + ")";
  };
  for (int i = 0; i < 300; ++i) {
    const auto seed1 = rng(), seed2 = rng();
    std::mt19937 r1(seed1), r2(seed2), r1b(seed1);
    Term t1 = gen(gen, r1, 4), t2 = gen(gen, r2, 4), t1b = gen(gen, r1b, 4);
    CHECK(t1 == t1b);
    CHECK((t1 == t2) == (render(render, t1) == render(render, t2)));
  }
}

TEST_CASE("bitvector operators follow SMT-LIB division and shift conventions") {
  auto ap = [](Op op, std::uint64_t a, std::uint64_t b, unsigned w) {
    std::array<std::uint64_t, 2> args{a, b};
    std::array<unsigned, 2> widths{w, w};
    return bv::apply(op, args, widths, {}, w);
  };
  CHECK(ap(Op::BvUdiv, 7, 0, 4) == 15);
  CHECK(ap(Op::BvUrem, 7, 0, 4) == 7);
  CHECK(ap(Op::BvShl, 1, 4, 4) == 0);
  CHECK(ap(Op::BvAshr, 8, 9, 4) == 15);
  CHECK(ap(Op::BvSdiv, 0xe, 2, 4) == 0xf);  // -2 / 2
  CHECK(ap(Op::BvSrem, 0xd, 2, 4) == 0xf);  // -3 rem 2 = -1
  CHECK(ap(Op::BvSmod, 0xd, 2, 4) == 1);    // -3 mod 2 = 1
  CHECK(ap(Op::BvSdiv, 3, 0, 4) == 15);
  CHECK(ap(Op::BvSdiv, 0xd, 0, 4) == 1);
  CHECK(ap(Op::BvSlt, 8, 7, 4) == 1);
}
