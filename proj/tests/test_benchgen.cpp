#include "qsic/benchgen.hpp"
#include "qsic/checker.hpp"
#include "qsic/error.hpp"

#include <doctest.h>

using namespace qsic;

namespace {

const char *kMem = "(set-logic QF_ABV)"
                   "(declare-fun mem0 () (Array (_ BitVec 3) (_ BitVec 4)))"
                   "(declare-fun mem1 () (Array (_ BitVec 3) (_ BitVec 4)))"
                   "(declare-fun tab () (Array (_ BitVec 3) (_ BitVec 4)))"
                   "(declare-fun p () (_ BitVec 3))"
                   "(assert (= mem1 (store mem0 p #x1)))"
                   "(assert (= (select mem1 p) (select tab #b000)))";

} // namespace

TEST_CASE("default selection quantifies arrays that are never written") {
  TermStore s;
  Script sc = parse_script(s, kMem);
  CHECK(select_arrays(s, sc, {}) == std::vector<std::string>{"mem0", "tab"});
  Script q = quantify_arrays(s, sc, {});
  CHECK(q.logic == "ABV");
  REQUIRE(q.assertions.size() == 1);
  CHECK(s.op(q.assertions[0].term) == Op::Forall);
  CHECK(s.bound_vars(q.assertions[0].term).size() == 2);
  CHECK(q.decls.size() == 2);
  TermStore s2;
  CHECK_NOTHROW(parse_script(s2, print_script(s, q)));
}

TEST_CASE("selection forms") {
  TermStore s;
  Script sc = parse_script(s, kMem);
  QuantifyPlan plan;
  parse_selection("mem*", plan);
  CHECK(select_arrays(s, sc, plan) == std::vector<std::string>{"mem0", "mem1"});
  parse_selection("all", plan);
  CHECK(select_arrays(s, sc, plan).size() == 3);
  parse_selection("nothing", plan);
  CHECK(select_arrays(s, sc, plan).empty());
  CHECK(print_script(s, quantify_arrays(s, sc, plan)) == print_script(s, sc));
  plan.min_selected = 1;
  CHECK_THROWS_AS(select_arrays(s, sc, plan), Error);
  QuantifyPlan c;
  parse_selection("count:2", c);
  c.seed = 42;
  auto first = select_arrays(s, sc, c);
  CHECK(first.size() == 2);
  CHECK(select_arrays(s, sc, c) == first);
  CHECK_THROWS(parse_selection("count:x", c));
}

TEST_CASE("output is deterministic and strengthens the input") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TermStore s1, s2;
    Script a = parse_script(s1, kMem), b = parse_script(s2, kMem);
    QuantifyPlan plan;
    parse_selection("count:1", plan);
    plan.seed = seed;
    const Script qa = quantify_arrays(s1, a, plan), qb = quantify_arrays(s2, b, plan);
    CHECK(print_script(s1, qa) == print_script(s2, qb));
  }
  // sat(output) implies sat(input), checked by enumeration at small width
  TermStore s;
  Script sc = parse_script(s, "(set-logic QF_ABV)(declare-fun t () (Array (_ BitVec 1) (_ BitVec 2)))"
                              "(declare-fun i () (_ BitVec 1))(assert (= (select t i) #b01))");
  Script q = quantify_arrays(s, sc, {});
  const auto in = brute_force_solve(s, conjoin_assertions(s, sc));
  const auto out = brute_force_solve(s, conjoin_assertions(s, q));
  CHECK(in.verdict == BruteVerdict::Sat);
  CHECK(out.verdict == BruteVerdict::Unsat);
}
