// Links only the shared library and its C header.
#include "qsic/qsic.h"

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <string>

namespace {

const char *kFig1 = "(set-logic ABV)(declare-fun a () (_ BitVec 8))(declare-fun b () (_ BitVec 8))"
                    "(assert (forall ((x (_ BitVec 8))) (bvsgt (bvadd (bvmul a x) b) #x00)))";

struct Ctx {
  qsic_context *p = qsic_context_new();
  ~Ctx() { qsic_context_free(p); }
};

} // namespace

TEST_CASE("preprocess through the C API") {
  Ctx c;
  qsic_result *r = nullptr;
  REQUIRE(qsic_preprocess(c.p, kFig1, nullptr, &r) == QSIC_OK);
  CHECK(std::string(qsic_result_sic(r)) == "(= a #x00)");
  CHECK(qsic_result_is_wic(r) == 0);
  CHECK(std::string(qsic_result_output(r)).find("(assert (= a #x00))") != std::string::npos);
  CHECK(std::string(qsic_result_report(r)).find("\"size_bound_holds\":true") != std::string::npos);
  qsic_result_free(r);
}

TEST_CASE("errors carry a status and a message") {
  Ctx c;
  qsic_result *r = reinterpret_cast<qsic_result *>(1);
  CHECK(qsic_preprocess(c.p, "(assert (= a", nullptr, &r) == QSIC_E_PARSE);
  CHECK(r == nullptr);
  CHECK(std::string(qsic_last_error(c.p)).find("1:") == 0);
  CHECK(qsic_preprocess(c.p, "(assert (= #x1 #b1))", nullptr, &r) == QSIC_E_SORT);
  CHECK(std::string(qsic_status_name(QSIC_E_SORT)) == "sort-mismatch");
  CHECK(qsic_preprocess(c.p, nullptr, nullptr, &r) == QSIC_E_INVALID_ARGUMENT);
  CHECK(qsic_preprocess(nullptr, kFig1, nullptr, &r) == QSIC_E_INVALID_ARGUMENT);
  qsic_preprocess_options o;
  qsic_preprocess_options_init(&o);
  o.rules = "(absorb bvmul 2 (3) true)";
  CHECK(qsic_preprocess(c.p, kFig1, &o, &r) == QSIC_E_MALFORMED_RULE);
  o.rules = nullptr;
  o.targets = "b";
  CHECK(qsic_preprocess(c.p, kFig1, &o, &r) == QSIC_E_INVALID_ARGUMENT);
  qsic_solver_options so;
  qsic_solver_options_init(&so);
  so.command = "/nonexistent/solver {file}";
  CHECK(qsic_solve(c.p, kFig1, nullptr, &so, &r) == QSIC_E_SOLVER_NOT_FOUND);
  qsic_result_free(nullptr);
}

TEST_CASE("solve with the enumerating backend and check") {
  Ctx c;
  qsic_solver_options so;
  qsic_solver_options_init(&so);
  so.enumerate = 1;
  qsic_result *r = nullptr;
  const char *small = "(declare-fun a () (_ BitVec 4))(declare-fun b () (_ BitVec 4))"
                      "(assert (forall ((x (_ BitVec 4))) (bvsgt (bvadd (bvmul a x) b) #x0)))";
  REQUIRE(qsic_solve(c.p, small, nullptr, &so, &r) == QSIC_OK);
  CHECK(qsic_result_verdict(r) == QSIC_SAT);
  CHECK(std::string(qsic_result_model(r)).find("(define-fun a () (_ BitVec 4) #x0)") != std::string::npos);
  qsic_result_free(r);

  qsic_check_options co;
  qsic_check_options_init(&co);
  co.widths = 4;
  co.lift = 1;
  REQUIRE(qsic_check(c.p, kFig1, nullptr, &co, &so, &r) == QSIC_OK);
  CHECK(qsic_result_check_ok(r) == 1);
  const std::string lines = qsic_result_report(r);
  CHECK(lines.find("\"check\":\"sic\",\"result\":\"valid\"") != std::string::npos);
  CHECK(lines.find("\"check\":\"lifted\",\"result\":\"ok\"") != std::string::npos);
  qsic_result_free(r);

  co.sic = "true";
  co.lift = 0;
  REQUIRE(qsic_check(c.p, kFig1, nullptr, &co, &so, &r) == QSIC_OK);
  CHECK(qsic_result_check_ok(r) == 0);
  qsic_result_free(r);
}

TEST_CASE("benchgen and enum-solve") {
  Ctx c;
  qsic_result *r = nullptr;
  const char *qf = "(set-logic QF_ABV)(declare-fun t () (Array (_ BitVec 2) (_ BitVec 2)))"
                   "(declare-fun i () (_ BitVec 2))(assert (= (select t i) #b01))";
  REQUIRE(qsic_benchgen(c.p, qf, "unwritten", 0, 1, &r) == QSIC_OK);
  CHECK(std::string(qsic_result_output(r)).find("(forall ((t (Array (_ BitVec 2) (_ BitVec 2))))") !=
        std::string::npos);
  qsic_result_free(r);
  CHECK(qsic_benchgen(c.p, qf, "nomatch", 0, 1, &r) == QSIC_E_NO_ARRAY_SYMBOLS);

  REQUIRE(qsic_enum_solve(c.p, qf, 0, &r) == QSIC_OK);
  CHECK(qsic_result_verdict(r) == QSIC_SAT);
  qsic_result_free(r);
  REQUIRE(qsic_enum_solve(c.p, "(declare-fun i () (_ BitVec 2))(assert (distinct i i))", 0, &r) == QSIC_OK);
  CHECK(qsic_result_verdict(r) == QSIC_UNSAT);
  qsic_result_free(r);
}
