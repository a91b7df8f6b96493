#include "qsic/normalize.hpp"
#include "qsic/pipeline.hpp"
#include "qsic/sic.hpp"
#include "qsic/smtlib.hpp"
#include "qsic/term_util.hpp"

#include <doctest.h>

using namespace qsic;

namespace {

const char *kFig1 = R"((set-logic ABV)
(declare-fun a () (_ BitVec 8))
(declare-fun b () (_ BitVec 8))
(assert (forall ((x (_ BitVec 8))) (bvsgt (bvadd (bvmul a x) b) #x00)))
)";

struct Fixture {
  TermStore s;
  AbsorptionRegistry reg = AbsorptionRegistry::builtin();

  Term t(const char *text) { return parse_term(s, text); }
  void decl(const char *text) { parse_script(s, text); }
  Term sic(Term phi, std::initializer_list<const char *> targets, SicOptions o = {}) {
    TermSet ts;
    for (const char *n : targets)
      ts.insert(s.mk_var(n, s.symbols().lookup(n)->range));
    SicEngine e(s, reg, ts, o);
    return simplify(s, e.infer(phi).formula);
  }
};

template <class F> ErrorKind kind_of(F &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

} // namespace

TEST_CASE_FIXTURE(Fixture, "leaves: constants, targets and other variables") {
  decl("(declare-fun x () (_ BitVec 4))(declare-fun a () (_ BitVec 4))");
  CHECK(sic(t("#x3"), {"x"}) == s.mk_true());
  CHECK(sic(t("(= x #x0)"), {"x"}) == s.mk_false());
  CHECK(sic(t("(= a #x0)"), {"x"}) == s.mk_true());
}

TEST_CASE_FIXTURE(Fixture, "running example gives a = 0") {
  Script sc = parse_script(s, kFig1);
  Preprocessed p = preprocess(s, sc);
  CHECK(p.sic == parse_term(s, "(= a #x00)"));
  CHECK_FALSE(p.is_wic);
  CHECK(p.eliminated.size() == 1);
  CHECK(p.bound.holds());
}

TEST_CASE_FIXTURE(Fixture, "size bound holds for a formula that is a single leaf") {
  Script sc = parse_script(s, "(declare-fun p () Bool)(assert (forall ((x Bool)) p))");
  Preprocessed p = preprocess(s, sc);
  CHECK(p.bound.k >= 1);
  CHECK(p.bound.holds());
}

TEST_CASE_FIXTURE(Fixture, "uninterpreted function of a target is bottom") {
  decl("(declare-fun f ((_ BitVec 4) (_ BitVec 4)) (_ BitVec 4))"
       "(declare-fun x () (_ BitVec 4))(declare-fun a () (_ BitVec 4))");
  CHECK(sic(t("(= (f a x) #x0)"), {"x"}) == s.mk_false());
}

TEST_CASE_FIXTURE(Fixture, "absorbing-element rules for booleans and bitvectors") {
  decl("(declare-fun p () Bool)(declare-fun q () Bool)(declare-fun x () Bool)"
       "(declare-fun u () (_ BitVec 4))(declare-fun v () (_ BitVec 4))(declare-fun y () (_ BitVec 4))");
  // or: the untainted side must be true
  CHECK(sic(t("(or p x)"), {"x"}) == t("p"));
  CHECK(sic(t("(and p x)"), {"x"}) == t("(not p)"));
  CHECK(sic(t("(=> p x)"), {"x"}) == t("(not p)"));
  CHECK(sic(t("(=> x p)"), {"x"}) == t("p"));
  CHECK(sic(t("(= (bvand u y) #x0)"), {"y"}) == t("(= u #x0)"));
  CHECK(sic(t("(= (bvor u y) #x0)"), {"y"}) == t("(= u #xf)"));
  CHECK(sic(t("(= (bvshl y u) #x0)"), {"y"}) == t("(bvuge u #x4)"));
  CHECK(sic(t("(= (bvshl u y) #x0)"), {"y"}) == s.mk_false());
  // ite with an untainted condition selects the branch SIC
  CHECK(sic(t("(ite p x q)"), {"x"}) == t("(not p)"));
}

TEST_CASE_FIXTURE(Fixture, "select over store") {
  decl("(declare-fun t () (Array (_ BitVec 4) (_ BitVec 4)))"
       "(declare-fun i () (_ BitVec 4))(declare-fun j () (_ BitVec 4))(declare-fun e () (_ BitVec 4))");
  // reading back the written cell only needs the written value
  CHECK(sic(t("(= (select (store t i e) i) #x0)"), {"t"}) == s.mk_true());
  CHECK(sic(t("(= (select (store t i e) j) #x0)"), {"t"}) == t("(= i j)"));
  CHECK(sic(t("(= (select t j) #x0)"), {"t"}) == s.mk_false());
  CHECK(sic(t("(= (select (store t #x1 e) #x2) #x0)"), {"t"}) == s.mk_false());
  CHECK(sic(t("(= (select (store t #x1 e) #x1) #x0)"), {"t"}) == s.mk_true());
}

TEST_CASE_FIXTURE(Fixture, "declared shadow arrays") {
  decl("(declare-fun t () (Array (_ BitVec 4) (_ BitVec 4)))(declare-fun j () (_ BitVec 4))");
  TermSet ts{s.mk_var("t", s.symbols().lookup("t")->range)};
  SicEngine e(s, reg, ts, {.shadow = ShadowMode::Declared});
  SicResult r = e.infer(t("(= (select t j) #x0)"));
  REQUIRE(e.shadows().size() == 1);
  CHECK(s.name(e.shadows()[0].shadow) == "qsic!shadow!t");
  CHECK(s.symbols().declared("qsic!shadow!t"));
  CHECK(e.shadows()[0].read_indices == std::vector<Term>{t("j")});
  CHECK(has_quantifier(s, r.formula) == false);
}

TEST_CASE_FIXTURE(Fixture, "trivial WIC detection after simplification") {
  decl("(declare-fun x () (_ BitVec 4))(declare-fun a () (_ BitVec 4))(declare-fun b () (_ BitVec 4))");
  TermSet ts{t("x")};
  CHECK(detect_trivial_wic(s, t("(bvugt a b)"), ts)->is_wic);
  CHECK(detect_trivial_wic(s, simplify(s, t("(bvugt (bvadd (bvsub x x) a) #x0)")), ts));
  CHECK_FALSE(detect_trivial_wic(s, t("(bvugt (bvmul a x) #x0)"), ts));
}

TEST_CASE("registry validation") {
  AbsorptionRegistry r;
  CHECK(kind_of([&] { r.add({"bvmul", 2, {5}, "(= $5 (zeros $5))"}); }) == ErrorKind::MalformedRule);
  CHECK(kind_of([&] { r.add({"bvmul", 2, {1}, "(= $2 (zeros $2))"}); }) == ErrorKind::MalformedRule);
  CHECK(kind_of([&] { r.add({"bvmul", 2, {}, "true"}); }) == ErrorKind::MalformedRule);
  CHECK(kind_of([&] { r.add({"bvmul", 2, {1}, "(= $1"}); }) == ErrorKind::MalformedRule);
  CHECK_NOTHROW(r.add({"f", 3, {1, 3}, "(= $1 (zeros $1))"}));
  CHECK(r.rules("f", 3).size() == 1);
  CHECK(r.rules("f", 2).empty());
  auto parsed = AbsorptionRegistry::parse("(absorb g 2 (1) (= $1 #x0))");
  CHECK(parsed.rules("g", 2).size() == 1);
}

TEST_CASE_FIXTURE(Fixture, "user rule for xy+z style function") {
  decl("(declare-fun h ((_ BitVec 4) (_ BitVec 4) (_ BitVec 4)) (_ BitVec 4))"
       "(declare-fun x () (_ BitVec 4))(declare-fun y () (_ BitVec 4))(declare-fun z () (_ BitVec 4))");
  reg.add({"h", 3, {1, 3}, "(= $1 (zeros $1))"});
  CHECK(sic(t("(= (h x y z) #x0)"), {"y"}) == t("(= x #x0)"));
}

TEST_CASE_FIXTURE(Fixture, "ill-sorted relation is reported at use") {
  decl("(declare-fun h (Bool) Bool)(declare-fun x () Bool)");
  reg.add({"h", 1, {1}, "(= $1 (zeros $1))"});
  CHECK(kind_of([&] { sic(t("(h x)"), {"x"}); }) == ErrorKind::MalformedRule);
}

TEST_CASE_FIXTURE(Fixture, "iterative skolemization keeps skolems constant") {
  Script sc = parse_script(s, "(declare-fun k () (_ BitVec 4))"
                              "(assert (exists ((a (_ BitVec 4))) (forall ((x (_ BitVec 4)))"
                              "  (exists ((c (_ BitVec 4))) (forall ((y (_ BitVec 4)))"
                              "    (= (bvadd (bvmul a x) c (bvmul k y)) c))))))");
  Preprocessed p = preprocess(s, sc);
  CHECK(p.rounds == 2);
  CHECK(p.skolems.size() == 2);
  CHECK(p.eliminated.size() == 2);
  CHECK_FALSE(has_quantifier(s, p.output));
  Script out = output_script(s, sc, p);
  CHECK(out.logic == "QF_ABV");
  TermStore s2;
  CHECK_NOTHROW(parse_script(s2, print_script(s, out)));
}

TEST_CASE_FIXTURE(Fixture, "quantifier-free input has a true WIC") {
  Script sc = parse_script(s, "(declare-fun a () (_ BitVec 4))(assert (= a #x1))");
  Preprocessed p = preprocess(s, sc);
  CHECK(p.sic == s.mk_true());
  CHECK(p.is_wic);
}

TEST_CASE_FIXTURE(Fixture, "targets must cover the universal variables") {
  Script sc = parse_script(s, kFig1);
  PreprocessOptions o;
  o.targets = {"a"};
  CHECK(kind_of([&] { preprocess(s, sc, o); }) == ErrorKind::InvalidArgument);
}
