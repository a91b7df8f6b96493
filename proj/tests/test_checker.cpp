#include "qsic/checker.hpp"

#include "../src/checker/abstract.hpp"
#include "qsic/eval.hpp"
#include "qsic/normalize.hpp"
#include "qsic/pipeline.hpp"
#include "qsic/sic.hpp"
#include "qsic/term_util.hpp"

#include <doctest.h>

using namespace qsic;

namespace {

struct Fixture {
  TermStore s;
  Term t(const char *text) { return parse_term(s, text); }
  void decl(const char *text) { parse_script(s, text); }
  TermSet targets(std::initializer_list<const char *> names) {
    TermSet ts;
    for (const char *n : names)
      ts.insert(s.mk_var(n, s.symbols().lookup(n)->range));
    return ts;
  }
};

const AbsorptionRegistry &builtin() {
  static const AbsorptionRegistry r = AbsorptionRegistry::builtin();
  return r;
}

// Truth-table equivalence over all free constants, or over 2000 random
// valuations when the domain is too large to enumerate.
bool equivalent(TermStore &s, Term a, Term b) {
  const Term diff = s.mk(Op::Distinct, {a, b});
  const BruteResult r = brute_force_solve(s, diff, 1u << 20);
  if (r.verdict != BruteVerdict::Unknown)
    return r.verdict == BruteVerdict::Unsat;
  std::mt19937_64 rng(1);
  const std::vector<Term> vars = free_vars(s, diff);
  for (int i = 0; i < 2000; ++i) {
    Model m;
    for (Term v : vars)
      m.constants[std::string(s.name(v))] = random_value(s, s.sort(v), rng);
    if (eval(s, diff, m).bits)
      return false;
  }
  return true;
}

} // namespace

TEST_CASE_FIXTURE(Fixture, "check_sic accepts the running example SIC and rejects true") {
  decl("(declare-fun a () (_ BitVec 4))(declare-fun b () (_ BitVec 4))(declare-fun x () (_ BitVec 4))");
  const Term phi = t("(bvsgt (bvadd (bvmul a x) b) #x0)");
  const TermSet ts = targets({"x"});
  CheckResult ok = check_sic(s, phi, t("(= a #x0)"), ts);
  CHECK(ok.ok);
  CHECK_FALSE(ok.sampled);
  CHECK(ok.evaluations > 0);

  CheckResult bad = check_sic(s, phi, s.mk_true(), ts);
  CHECK_FALSE(bad.ok);
  REQUIRE(bad.targets.size() == 3);
  // the witness really is a counterexample
  Model m1 = bad.witness, m2 = bad.witness;
  for (auto &[k, v] : bad.targets[1].constants)
    m1.constants[k] = v;
  for (auto &[k, v] : bad.targets[2].constants)
    m2.constants[k] = v;
  CHECK(eval(s, phi, m1).bits != eval(s, phi, m2).bits);
}

TEST_CASE_FIXTURE(Fixture, "check_wic against the exact independence condition") {
  decl("(declare-fun a () (_ BitVec 3))(declare-fun x () (_ BitVec 3))");
  const Term phi = t("(= (bvand a x) #b000)");
  const TermSet ts = targets({"x"});
  CHECK(check_wic(s, phi, t("(= a #b000)"), ts).ok);
  CHECK_FALSE(check_wic(s, phi, s.mk_false(), ts).ok);
  // a SIC that is not weakest
  CHECK_FALSE(check_wic(s, t("(or (= a #b000) (= x x))"), t("(= a #b000)"), ts).ok);
}

TEST_CASE_FIXTURE(Fixture, "lifted model check") {
  Script sc = parse_script(s, "(declare-fun a () (_ BitVec 4))(declare-fun b () (_ BitVec 4))"
                              "(assert (forall ((x (_ BitVec 4))) (bvsgt (bvadd (bvmul a x) b) #x0)))");
  const Term phi = conjoin_assertions(s, sc);
  Model good;
  good.constants["a"] = bv_value(s, 0, 4);
  good.constants["b"] = bv_value(s, 3, 4);
  CHECK(check_lifted_model(s, phi, good).ok);
  Model bad = good;
  bad.constants["a"] = bv_value(s, 1, 4);
  CheckResult r = check_lifted_model(s, phi, bad);
  CHECK_FALSE(r.ok);
  CHECK(r.targets.size() == 1);
  Model none;
  CHECK_THROWS(check_lifted_model(s, phi, none));
}

TEST_CASE_FIXTURE(Fixture, "lifted model fixes existential witnesses") {
  Script sc = parse_script(s, "(assert (exists ((e (_ BitVec 3))) (forall ((x (_ BitVec 3)))"
                              " (= (bvand e x) #b000))))");
  const Term phi = conjoin_assertions(s, sc);
  Model m;
  m.constants["e"] = bv_value(s, 0, 3);
  CHECK(check_lifted_model(s, phi, m).ok);
  m.constants["e"] = bv_value(s, 2, 3);
  CHECK_FALSE(check_lifted_model(s, phi, m).ok);
}

TEST_CASE_FIXTURE(Fixture, "brute force solving") {
  decl("(declare-fun a () (_ BitVec 4))(declare-fun b () (_ BitVec 4))");
  BruteResult r = brute_force_solve(s, t("(and (bvult a b) (= (bvadd a b) #x3))"));
  REQUIRE(r.verdict == BruteVerdict::Sat);
  CHECK(eval(s, t("(and (bvult a b) (= (bvadd a b) #x3))"), r.model).bits == 1);
  CHECK(brute_force_solve(s, t("(and (bvult a b) (bvult b a))")).verdict == BruteVerdict::Unsat);
  CHECK(brute_force_solve(s, t("(forall ((x (_ BitVec 4))) (= (bvmul a x) #x0))")).verdict ==
        BruteVerdict::Sat);
}

TEST_CASE_FIXTURE(Fixture, "value_term round trip") {
  decl("(declare-fun m () (Array (_ BitVec 2) (_ BitVec 4)))");
  std::mt19937_64 rng(7);
  const Sort as = s.symbols().lookup("m")->range;
  for (int i = 0; i < 50; ++i) {
    Value v = random_value(s, as, rng);
    CHECK(values_equal(s, eval(s, value_term(s, v), Model{}), v));
  }
}

TEST_CASE("random formulas are well sorted and deterministic") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    TermStore s1, s2;
    std::mt19937_64 r1(seed), r2(seed);
    Generated g1 = random_formula(s1, {}, r1);
    Generated g2 = random_formula(s2, {}, r2);
    CHECK(print_term(s1, g1.phi) == print_term(s2, g2.phi));
    CHECK(s1.is_bool(s1.sort(g1.phi)));
    Script sc = quantified_script(s1, g1);
    TermStore s3;
    CHECK_NOTHROW(parse_script(s3, print_script(s1, sc)));
  }
}

TEST_CASE("property: inferred SICs are sound on random formulas") {
  unsigned exact = 0;
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    for (ShadowMode mode : {ShadowMode::ConstArray, ShadowMode::Declared}) {
      TermStore s;
      std::mt19937_64 rng(seed);
      GenOptions go;
      go.max_depth = 4;
      Generated g = random_formula(s, go, rng);
      TermSet ts(g.targets.begin(), g.targets.end());
      SicEngine e(s, builtin(), ts, {.shadow = mode});
      const Term psi = e.infer(g.phi).formula;
      Universe u;
      u.seed = seed;
      CheckResult r = check_sic(s, g.phi, psi, ts, u);
      CHECK_MESSAGE(r.ok, "seed " << seed << ": " << print_term(s, g.phi) << " with "
                                  << print_term(s, psi));
      exact += !r.sampled;
    }
  }
  CHECK(exact > 20);
}

TEST_CASE("property: every cached term SIC is a SIC for its term") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    TermStore s;
    std::mt19937_64 rng(seed);
    GenOptions go;
    go.max_depth = 3;
    Generated g = random_formula(s, go, rng);
    TermSet ts(g.targets.begin(), g.targets.end());
    SicEngine e(s, builtin(), ts);
    e.infer(g.phi);
    Universe u;
    u.non_target_samples = 32;
    u.target_samples = 16;
    u.pair_budget = 1u << 14;
    for (auto [term, sic] : e.cached()) {
      // virtual reads over store chains are not subterms of phi but are
      // still terms, so they are checked too
      CheckResult r = check_sic(s, term, sic, ts, u);
      CHECK_MESSAGE(r.ok, "seed " << seed << ": " << print_term(s, term));
    }
  }
}

TEST_CASE("property: bottom is a SIC and SICs are closed under strengthening") {
  for (std::uint64_t seed = 200; seed < 230; ++seed) {
    TermStore s;
    std::mt19937_64 rng(seed);
    GenOptions go;
    go.max_depth = 3;
    Generated g = random_formula(s, go, rng);
    TermSet ts(g.targets.begin(), g.targets.end());
    CHECK(check_sic(s, g.phi, s.mk_false(), ts).ok);
    SicEngine e(s, builtin(), ts);
    const Term psi = e.infer(g.phi).formula;
    Generated extra = random_formula(s, go, rng);
    CHECK(check_sic(s, g.phi, s.mk(Op::And, {psi, extra.phi}), ts).ok);
  }
}

TEST_CASE("property: memoization does not change the SIC") {
  for (std::uint64_t seed = 300; seed < 340; ++seed) {
    TermStore s;
    std::mt19937_64 rng(seed);
    Generated g = random_formula(s, {}, rng);
    TermSet ts(g.targets.begin(), g.targets.end());
    SicEngine on(s, builtin(), ts, {.memoize = true});
    SicEngine off(s, builtin(), ts, {.memoize = false});
    CHECK(on.infer(g.phi).formula == off.infer(g.phi).formula);
  }
}

TEST_CASE("property: simplify preserves meaning and is idempotent") {
  for (std::uint64_t seed = 400; seed < 460; ++seed) {
    TermStore s;
    std::mt19937_64 rng(seed);
    GenOptions go;
    go.max_depth = 4;
    go.max_width = 3;
    go.max_index_width = 2;
    go.arrays = seed % 2 == 0;
    Generated g = random_formula(s, go, rng);
    const Term simp = simplify(s, g.phi);
    CHECK_MESSAGE(equivalent(s, g.phi, simp), "seed " << seed << ": " << print_term(s, g.phi));
    CHECK(simplify(s, simp) == simp);
  }
}

TEST_CASE("property: the ite rule is a SIC for ite at the boolean level") {
  TermStore s;
  parse_script(s, "(declare-fun c () Bool)(declare-fun u () Bool)(declare-fun v () Bool)"
                  "(declare-fun x () Bool)");
  TermSet ts{s.mk_var("x", s.bool_sort())};
  const char *cases[] = {"(ite c x v)", "(ite x u v)", "(ite x u u)", "(ite c u x)",
                         "(ite (and c x) u (or v x))", "(ite c (and u x) (and v x))"};
  for (const char *text : cases) {
    const Term phi = parse_term(s, text);
    SicEngine e(s, builtin(), ts);
    const Term psi = e.infer(phi).formula;
    CHECK_MESSAGE(check_sic(s, phi, psi, ts).ok, text);
  }
  // (ite x u u) is independent of x
  SicEngine e(s, builtin(), ts);
  CHECK(simplify(s, e.infer(parse_term(s, "(ite x u u)")).formula) == s.mk_true());
}

TEST_CASE("the SIC oracle rejects true for formulas that depend on their targets") {
  unsigned rejected = 0, dependent = 0;
  for (std::uint64_t seed = 500; seed < 560; ++seed) {
    TermStore s;
    std::mt19937_64 rng(seed);
    Generated g = random_formula(s, {}, rng);
    TermSet ts(g.targets.begin(), g.targets.end());
    CheckResult wic = check_wic(s, g.phi, s.mk_true(), ts);
    if (wic.ok || wic.sampled)
      continue;
    ++dependent;
    rejected += !check_sic(s, g.phi, s.mk_true(), ts).ok;
  }
  CHECK(dependent > 5);
  CHECK(rejected == dependent);
}

TEST_CASE("rescaling widths keeps formulas well sorted") {
  TermStore s;
  Script sc = parse_script(s, "(declare-fun a () (_ BitVec 8))(declare-fun b () (_ BitVec 8))"
                              "(declare-fun m () (Array (_ BitVec 16) (_ BitVec 8)))"
                              "(assert (forall ((x (_ BitVec 8))) (bvsgt (bvadd (bvmul a x) b) #x00)))"
                              "(assert (= ((_ extract 7 4) a) ((_ extract 3 0) (select m (concat a b)))))"
                              "(assert (= ((_ zero_extend 8) a) ((_ sign_extend 12) ((_ extract 3 0) b))))"
                              "(assert (= ((_ repeat 2) a) (concat b b)))");
  Script r = rescale_script(s, sc, 4);
  CHECK(print_term(s, r.assertions[0].term) ==
        "(forall ((x (_ BitVec 4))) (bvsgt (bvadd (bvmul a x) b) #x0))");
  TermStore s2;
  CHECK_NOTHROW(parse_script(s2, print_script(s, r)));
  CHECK(s.width(s.symbols().lookup("a")->range) == 4);
  CHECK(rescale_widths(s, parse_term(s, "#b101"), 4) == parse_term(s, "#b101"));
}

TEST_CASE("abstract enumeration agrees with exact enumeration") {
  unsigned decided = 0;
  for (std::uint64_t seed = 300; seed < 500; ++seed) {
    TermStore s;
    std::mt19937_64 rng(seed);
    GenOptions go;
    go.max_depth = 4;
    go.max_width = 2;
    go.max_index_width = 1;
    Generated g = random_formula(s, go, rng);
    const BruteResult exact = brute_force_solve(s, g.phi);
    REQUIRE(exact.verdict != BruteVerdict::Unknown);
    // abstracting everything but a 2^4 budget of values
    const BruteResult abs = brute_force_abstract(s, g.phi, 16);
    if (abs.verdict != BruteVerdict::Unknown) {
      ++decided;
      CHECK_MESSAGE(abs.verdict == exact.verdict, "seed " << seed << ": " << print_term(s, g.phi));
    }
  }
  CHECK(decided > 40);
}

TEST_CASE("brute force falls back to unknown symbols for large arrays and functions") {
  TermStore s;
  Script sc = parse_script(s, "(declare-fun m () (Array (_ BitVec 4) (_ BitVec 4)))(declare-fun a () (_ BitVec 4))"
                              "(declare-fun f ((_ BitVec 4)) Bool)"
                              "(assert (forall ((t (Array (_ BitVec 4) (_ BitVec 4))))"
                              " (bvult (select t a) (bvmul (select m a) #x0))))");
  CHECK(brute_force_solve(s, conjoin_assertions(s, sc)).verdict == BruteVerdict::Unsat);
  Term uf = parse_term(s, "(and (f a) (bvult a #x0))");
  CHECK(brute_force_solve(s, uf).verdict == BruteVerdict::Unsat);
  Term open = parse_term(s, "(= (select m a) a)");
  CHECK(brute_force_solve(s, open).verdict == BruteVerdict::Unknown);
  BruteResult sat = brute_force_solve(s, parse_term(s, "(or (f a) (= a #x3))"));
  REQUIRE(sat.verdict == BruteVerdict::Sat);
  CHECK(sat.model.find("a")->bits == 3);
}
