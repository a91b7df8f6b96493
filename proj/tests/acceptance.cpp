// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria. An optional argument names a directory where
// the generated corpus is kept; otherwise a temporary directory is used.

#include "qsic/benchgen.hpp"
#include "qsic/checker.hpp"
#include "qsic/error.hpp"
#include "qsic/eval.hpp"
#include "qsic/pipeline.hpp"
#include "qsic/solver.hpp"
#include "qsic/term_util.hpp"

#include "../src/driver/subprocess.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <unistd.h>

using namespace qsic;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and sizes.
constexpr double kFig1Seconds = 5.0;
constexpr unsigned kSuite = 500;
constexpr unsigned kAdversarial = 100;
constexpr unsigned kByteBatch = 100;
constexpr double kByteRatio = 15.0;
constexpr std::size_t kLargeNodes = 100000;
constexpr double kTaintSimplifySeconds = 1.0;
constexpr unsigned kTrivial = 50;
constexpr unsigned kCorpus = 1000;
constexpr unsigned kGround = 1000;
constexpr std::uint64_t kBruteBudget = 1u << 22;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool have_z3() { return std::system("command -v z3 >/dev/null 2>&1") == 0; }
bool g_z3 = false;

SolverConfig solver() {
  SolverConfig c = default_solver_config();
  c.timeout = 20;
  return c;
}

SolveResult solve(TermStore &s, const Script &sc) {
  return g_z3 ? solve_q(s, sc, solver()) : solve_q_enumerating(s, sc);
}

struct Line {
  bool pass = false;
  std::string detail;
};

void report(int n, const char *name, const Line &l) {
  std::printf("criterion %d: %s  %s: %s\n", n, l.pass ? "PASS" : "FAIL", name, l.detail.c_str());
  std::fflush(stdout);
}

// Size-bound tally over every preprocessing run in this program.
struct BoundTally {
  unsigned runs = 0, violations = 0;
  std::string first;
  void add(const Preprocessed &p, const std::string &what) {
    ++runs;
    if (!p.bound.holds()) {
      if (!violations)
        first = what;
      ++violations;
    }
  }
} g_bound;

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------

const char *kFig1 = "(set-logic ABV)\n(declare-fun a () (_ BitVec 8))\n(declare-fun b () (_ BitVec 8))\n"
                    "(assert (forall ((x (_ BitVec 8))) (bvsgt (bvadd (bvmul a x) b) #x00)))\n(check-sat)\n";

// SIC of the running example is equivalent to a = 0, by truth table.
bool sic_is_a_zero(TermStore &s, Term sic, unsigned w) {
  const Term a = s.mk_var("a", s.bv_sort(w));
  const Term iff = s.mk(Op::Eq, {sic, s.mk(Op::Eq, {a, s.mk_bv(0, w)})});
  return brute_force_solve(s, s.mk(Op::Not, {iff}), kBruteBudget).verdict == BruteVerdict::Unsat;
}

Line criterion1() {
  Line l;
  const auto t0 = Clock::now();
  TermStore s;
  const Script sc = parse_script(s, kFig1);
  const Preprocessed pre = preprocess(s, sc);
  g_bound.add(pre, "running example");
  const bool eq8 = sic_is_a_zero(s, pre.sic, 8);

  TermStore s4;
  const Script sc4 = rescale_script(s4, parse_script(s4, kFig1), 4);
  const Preprocessed pre4 = preprocess(s4, sc4);
  const bool eq4 = sic_is_a_zero(s4, pre4.sic, 4);

  const SolveResult r = solve(s, sc);
  const Value *a = r.model.find("a");
  const bool a0 = r.verdict == Verdict::Sat && a && a->bits == 0;
  bool lifted = false;
  if (r.verdict == Verdict::Sat)
    lifted = check_lifted_model(s, conjoin_assertions(s, sc), r.model).ok;
  const double secs = since(t0);
  l.pass = eq4 && eq8 && a0 && lifted && secs < kFig1Seconds;
  l.detail = "sic " + print_term(s, pre.sic) + (eq4 ? " == a=0 at BV4" : " != a=0 at BV4") +
             (eq8 ? " and BV8" : " (not at BV8)") + ", " + to_string(r.verdict) +
             (a0 ? " with a=0" : " without a=0") + (lifted ? ", lifted ok" : ", lift failed") +
             " via " + (g_z3 ? "z3" : "enumeration") + ", " + fmt("%.3fs", secs);
  return l;
}

// ---------------------------------------------------------------------------

struct SuiteStats {
  unsigned exact = 0, sampled = 0, sic_fail = 0;
  unsigned sat = 0, unsat = 0, unknown = 0, lift_fail = 0, errors = 0;
  unsigned wrong_unsat = 0, unconfirmed_unsat = 0;
  std::string first_sic_fail, first_lift_fail, first_unsat_issue, first_error;
};

// unsat must come with is_wic and survive exhaustive enumeration.
void audit_unsat(TermStore &s, const Script &sc, const SolveResult &r, SuiteStats &st,
                 const std::string &what) {
  if (r.verdict != Verdict::Unsat)
    return;
  ++st.unsat;
  if (!r.pre.is_wic) {
    ++st.wrong_unsat;
    if (st.first_unsat_issue.empty())
      st.first_unsat_issue = what + ": unsat without a WIC";
    return;
  }
  const BruteResult b = brute_force_solve(s, conjoin_assertions(s, sc), kBruteBudget);
  if (b.verdict == BruteVerdict::Sat) {
    ++st.wrong_unsat;
    if (st.first_unsat_issue.empty())
      st.first_unsat_issue = what + ": enumeration finds a model";
  } else if (b.verdict == BruteVerdict::Unknown) {
    ++st.unconfirmed_unsat;
    if (st.first_unsat_issue.empty())
      st.first_unsat_issue = what + ": domain too large to enumerate";
  }
}

void solve_and_audit(TermStore &s, const Script &sc, SuiteStats &st, const std::string &what) {
  SolveResult r;
  try {
    r = solve(s, sc);
  } catch (const Error &e) {
    ++st.errors;
    if (st.first_error.empty())
      st.first_error = what + ": " + e.what();
    return;
  }
  g_bound.add(r.pre, what);
  switch (r.verdict) {
  case Verdict::Sat: {
    ++st.sat;
    const CheckResult c = check_lifted_model(s, conjoin_assertions(s, sc), r.model);
    if (!c.ok) {
      ++st.lift_fail;
      if (st.first_lift_fail.empty())
        st.first_lift_fail = what + ": " + c.detail;
    }
    break;
  }
  case Verdict::Unsat: audit_unsat(s, sc, r, st, what); break;
  case Verdict::Unknown: ++st.unknown; break;
  }
}

SuiteStats g_suite;

void run_suite() {
  static const AbsorptionRegistry registry = AbsorptionRegistry::builtin();
  for (unsigned seed = 0; seed < kSuite; ++seed) {
    const std::string what = "seed " + std::to_string(seed);
    TermStore s;
    std::mt19937_64 rng(seed);
    const Generated g = random_formula(s, GenOptions{}, rng); // widths <= 4, index <= 3, depth <= 6
    const TermSet ts(g.targets.begin(), g.targets.end());
    SicEngine e(s, registry, ts);
    const Term psi = e.infer(g.phi).formula;
    Universe u;
    u.seed = seed;
    const CheckResult c = check_sic(s, g.phi, psi, ts, u);
    (c.sampled ? g_suite.sampled : g_suite.exact)++;
    if (!c.ok) {
      ++g_suite.sic_fail;
      if (g_suite.first_sic_fail.empty())
        g_suite.first_sic_fail = what + ": " + print_term(s, g.phi);
    }
    const Script sc = quantified_script(s, g);
    solve_and_audit(s, sc, g_suite, what);
  }
}

Line criterion2() {
  const SuiteStats &st = g_suite;
  Line l;
  l.pass = st.sic_fail == 0 && st.exact + st.sampled == kSuite;
  l.detail = std::to_string(kSuite) + " formulas, " + std::to_string(st.exact) + " exact, " +
             std::to_string(st.sampled) + " sampled, " + std::to_string(st.sic_fail) + " counterexamples" +
             (st.first_sic_fail.empty() ? "" : " (first " + st.first_sic_fail + ")");
  return l;
}

Line criterion3() {
  const SuiteStats &st = g_suite;
  Line l;
  l.pass = st.lift_fail == 0 && st.errors == 0 && st.sat > 0;
  l.detail = std::to_string(st.sat) + " sat, " + std::to_string(st.lift_fail) + " lifting violations, " +
             std::to_string(st.unsat) + " unsat, " + std::to_string(st.unknown) + " unknown, " +
             std::to_string(st.errors) + " errors" +
             (st.first_lift_fail.empty() ? "" : " (first " + st.first_lift_fail + ")") +
             (st.first_error.empty() ? "" : " (first error " + st.first_error + ")");
  return l;
}

// Unsatisfiable inputs whose strengthening tends to be unsat too, without
// a WIC. Every one is first confirmed unsat by enumeration.
std::vector<std::string> adversarial_inputs() {
  auto bv = [](unsigned w) { return "(_ BitVec " + std::to_string(w) + ")"; };
  auto lit = [](std::uint64_t v, unsigned w) { return print_bv(v & ((1ULL << w) - 1), w); };
  std::vector<std::function<std::string(unsigned, std::uint64_t)>> families = {
      [&](unsigned w, std::uint64_t) { return "(assert (forall ((x " + bv(w) + ")) (= x a)))"; },
      [&](unsigned w, std::uint64_t) { return "(assert (forall ((x " + bv(w) + ")) (bvult x a)))"; },
      [&](unsigned w, std::uint64_t) {
        return "(assert (forall ((x " + bv(w) + ")) (and (= (bvmul a x) x) (distinct a " + lit(1, w) + "))))";
      },
      [&](unsigned w, std::uint64_t) {
        return "(assert (forall ((x " + bv(w) + ")) (and (= (bvor x a) a) (distinct a " + lit(~0ULL, w) + "))))";
      },
      [&](unsigned w, std::uint64_t) {
        return "(assert (forall ((x " + bv(w) + ") (y " + bv(w) + ")) (= (bvadd x y) a)))";
      },
      [&](unsigned w, std::uint64_t) {
        return "(assert (forall ((i " + bv(w) + ")) (distinct (select m i) (select m c))))";
      },
      [&](unsigned w, std::uint64_t) {
        return "(assert (forall ((q (Array " + bv(w) + " " + bv(w) + "))) (= (select q c) a)))";
      },
      [&](unsigned w, std::uint64_t k) {
        return "(assert (forall ((x " + bv(w) + ")) (and (bvult a " + lit(k, w) + ") (bvuge (bvor a x) a) (bvuge a " +
               lit(k, w) + "))))";
      },
      [&](unsigned w, std::uint64_t) {
        return "(assert (forall ((x " + bv(w) + ")) (and (= (ite p x a) b) (not p) (distinct a b))))";
      },
      [&](unsigned w, std::uint64_t) {
        return "(assert (forall ((x " + bv(w) + ")) (= (bvand x a) (bvor x a))))";
      },
      [&](unsigned w, std::uint64_t) {
        return "(assert (forall ((x " + bv(w) + ")) (bvslt (bvmul a x) (bvmul a x))))";
      },
      [&](unsigned w, std::uint64_t k) {
        return "(assert (forall ((x " + bv(w) + ")) (and (= (bvmul a x) " + lit(k, w) + ") (bvult (bvshl x a) " +
               lit(k, w) + "))))";
      },
  };
  std::vector<std::string> out;
  for (std::uint64_t k = 0; out.size() < kAdversarial; ++k)
    for (std::size_t f = 0; f < families.size() && out.size() < kAdversarial; ++f)
      for (unsigned w = 1; w <= 4 && out.size() < kAdversarial; ++w) {
        // array families stay enumerable: w bits by 2^w cells
        if ((f == 5 || f == 6) && w > 2)
          continue;
        const std::string decls = "(declare-fun a () " + bv(w) + ")(declare-fun b () " + bv(w) +
                                  ")(declare-fun c () " + bv(w) + ")(declare-fun p () Bool)" +
                                  "(declare-fun m () (Array " + bv(w) + " " + bv(w) + "))";
        out.push_back(decls + families[f](w, k * 5 + 3));
      }
  return out;
}

Line criterion4() {
  SuiteStats adv;
  unsigned not_unsat = 0;
  std::string first_bad;
  const std::vector<std::string> inputs = adversarial_inputs();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    TermStore s;
    const Script sc = parse_script(s, inputs[i]);
    if (brute_force_solve(s, conjoin_assertions(s, sc), kBruteBudget).verdict != BruteVerdict::Unsat) {
      if (!not_unsat++)
        first_bad = inputs[i];
      continue;
    }
    solve_and_audit(s, sc, adv, "adversarial " + std::to_string(i));
  }
  const SuiteStats &st = g_suite;
  const unsigned wrong = st.wrong_unsat + adv.wrong_unsat + adv.lift_fail;
  const unsigned unconfirmed = st.unconfirmed_unsat + adv.unconfirmed_unsat;
  Line l;
  l.pass = wrong == 0 && unconfirmed == 0 && not_unsat == 0 && adv.errors == 0;
  l.detail = "suite: " + std::to_string(st.unsat) + " unsat; adversarial: " + std::to_string(inputs.size()) +
             " inputs, " + std::to_string(adv.unsat) + " unsat, " + std::to_string(adv.unknown) + " unknown, " +
             std::to_string(adv.sat) + " sat; " + std::to_string(wrong) + " wrong, " +
             std::to_string(unconfirmed) + " unconfirmed";
  if (not_unsat)
    l.detail += "; " + std::to_string(not_unsat) + " adversarial inputs not unsat, e.g. " + first_bad;
  if (!adv.first_error.empty())
    l.detail += "; error " + adv.first_error;
  const std::string &issue = st.first_unsat_issue.empty() ? adv.first_unsat_issue : st.first_unsat_issue;
  if (!issue.empty())
    l.detail += " (first " + issue + ")";
  return l;
}

// ---------------------------------------------------------------------------

// A symbolic-execution style QF_ABV script: byte memory written through SSA
// states, 32-bit inputs, and path conditions over multi-byte loads.
std::string ssa_script(std::mt19937_64 &rng, unsigned writes, unsigned conditions) {
  auto pick = [&](unsigned n) { return static_cast<unsigned>(rng() % n); };
  auto hex32 = [&](std::uint64_t v) { return print_bv(v & 0xffffffffu, 32); };
  std::ostringstream o;
  o << "(set-logic QF_ABV)\n(declare-fun mem0 () (Array (_ BitVec 32) (_ BitVec 8)))\n"
    << "(declare-fun env () (Array (_ BitVec 32) (_ BitVec 32)))\n";
  const unsigned inputs = 3 + pick(3);
  for (unsigned i = 0; i < inputs; ++i)
    o << "(declare-fun in" << i << " () (_ BitVec 32))\n";
  auto input = [&] { return "in" + std::to_string(pick(inputs)); };
  auto addr = [&]() -> std::string {
    switch (pick(3)) {
    case 0: return hex32(0x1000 + pick(64));
    case 1: return "(bvadd " + input() + " " + hex32(pick(16)) + ")";
    default: return "(select env " + hex32(pick(8)) + ")";
    }
  };
  auto load32 = [&](unsigned mem) {
    const std::string a = addr(), m = "mem" + std::to_string(mem);
    std::string r = "(select " + m + " " + a + ")";
    for (unsigned k = 1; k < 4; ++k)
      r = "(concat (select " + m + " (bvadd " + a + " " + hex32(k) + ")) " + r + ")";
    return r;
  };
  auto value = [&](unsigned mem) -> std::string {
    switch (pick(4)) {
    case 0: return load32(mem);
    case 1: return "(bvmul " + input() + " " + hex32(1 + pick(9)) + ")";
    case 2: return "(bvand " + input() + " " + load32(mem) + ")";
    default: return input();
    }
  };
  for (unsigned i = 0; i < writes; ++i) {
    o << "(declare-fun mem" << i + 1 << " () (Array (_ BitVec 32) (_ BitVec 8)))\n"
      << "(assert (= mem" << i + 1 << " (store mem" << i << " " << addr() << " ((_ extract 7 0) " << value(i)
      << "))))\n";
  }
  for (unsigned i = 0; i < conditions; ++i) {
    const unsigned mem = pick(writes + 1);
    const char *rel[] = {"bvult", "bvsle", "=", "distinct"};
    o << "(assert (" << rel[pick(4)] << " " << value(mem) << " " << value(mem) << "))\n";
  }
  o << "(check-sat)\n";
  return o.str();
}

Line criterion5() {
  double sum = 0, worst = 0;
  unsigned errors = 0;
  std::string first_error;
  for (unsigned i = 0; i < kByteBatch; ++i) {
    std::mt19937_64 rng(1000 + i);
    TermStore s;
    try {
      const Script qf = parse_script(s, ssa_script(rng, 2 + i % 6, 2 + i % 5));
      QuantifyPlan plan;
      const Script q = quantify_arrays(s, qf, plan);
      const Preprocessed pre = preprocess(s, q);
      g_bound.add(pre, "byte batch " + std::to_string(i));
      const double in = double(print_script(s, q).size());
      const double out = double(print_script(s, output_script(s, q, pre)).size());
      sum += out / in;
      worst = std::max(worst, out / in);
    } catch (const Error &e) {
      if (!errors++)
        first_error = e.what();
    }
  }
  Line l;
  l.pass = g_bound.violations == 0 && worst < kByteRatio && errors == 0;
  l.detail = "bound held on " + std::to_string(g_bound.runs - g_bound.violations) + "/" +
             std::to_string(g_bound.runs) + " runs" +
             (g_bound.violations ? " (first violation " + g_bound.first + ")" : "") + "; byte ratio over " +
             std::to_string(kByteBatch) + " formulas avg " + fmt("%.2f", sum / kByteBatch) + " max " +
             fmt("%.2f", worst) + " (limit " + fmt("%.0f", kByteRatio) + ")";
  if (errors)
    l.detail += "; " + std::to_string(errors) + " errors, first " + first_error;
  return l;
}

// ---------------------------------------------------------------------------

// A let chain of n/8 steps over a quantified word and a quantified array:
// each step mixes arithmetic, a read of the array and a store. With
// chain_reads the reads go to the latest stored state instead of the base.
std::string large_formula(std::size_t n, std::mt19937_64 &rng, bool chain_reads) {
  std::ostringstream o;
  o << "(set-logic ABV)\n(declare-fun a () (_ BitVec 32))\n(declare-fun b () (_ BitVec 32))\n"
    << "(assert (forall ((x (_ BitVec 32)) (mem (Array (_ BitVec 32) (_ BitVec 32))))\n";
  const std::size_t steps = n / 8;
  std::string closers = ")";
  o << "(let ((v0 x) (m0 mem))\n";
  for (std::size_t i = 1; i <= steps; ++i) {
    const std::string p = std::to_string(i - 1), c = std::to_string(i);
    const std::string k = print_bv(rng() & 0xffffffffu, 32);
    const std::string base = chain_reads ? "m" + p : "mem";
    o << "(let ((v" << c << " (ite (bvult v" << p << " a) (bvadd (bvmul v" << p << " b) " << k << ") (bvand v" << p
      << " (select " << base << " " << k << ")))) (m" << c << " (store m" << p << " (bvor a " << k << ") v" << p
      << ")))\n";
    closers += ")";
  }
  o << "(and (bvule v" << steps << " (select m" << steps << " b)) (= (bvmul a v" << steps << ") b))" << closers
    << "))\n";
  return o.str();
}

struct Timed {
  std::size_t nodes = 0;
  double seconds = 0;
};

// DAG nodes of the let-free input matrix and taint+simplify time.
Timed time_preprocess(const std::string &text, const std::string &what) {
  TermStore s;
  Script sc = parse_script(s, text);
  if (sc.logic.rfind("QF_", 0) == 0)
    sc = quantify_arrays(s, sc, QuantifyPlan{});
  const Term matrix = prenex(s, conjoin_assertions(s, sc)).matrix;
  Timed r;
  r.nodes = dag_size(s, expand_lets(s, matrix));
  const Preprocessed pre = preprocess(s, sc);
  g_bound.add(pre, what);
  RunReport rep;
  fill_report(s, rep, matrix, pre);
  r.seconds = rep.taint_seconds + rep.simplify_seconds;
  return r;
}

Line criterion6() {
  Line l;
  l.pass = true;
  std::ostringstream d;
  auto shape = [&](const char *name, bool counted, auto &&make) {
    double worst = 0;
    std::size_t smallest = SIZE_MAX;
    for (unsigned i = 0; i < 3; ++i) {
      std::mt19937_64 rng(77 + i);
      const Timed t = time_preprocess(make(rng), name);
      worst = std::max(worst, t.seconds);
      smallest = std::min(smallest, t.nodes);
    }
    if (counted)
      l.pass = l.pass && smallest >= kLargeNodes && worst < kTaintSimplifySeconds;
    d << (d.tellp() ? "; " : "") << name << (counted ? "" : " (not counted)") << " >= " << smallest
      << " nodes, worst " << fmt("%.3fs", worst);
  };
  shape("arithmetic chain", true, [](std::mt19937_64 &rng) { return large_formula(kLargeNodes, rng, false); });
  shape("symbolic execution", true, [](std::mt19937_64 &rng) { return ssa_script(rng, 8000, 5500); });
  // Every step reads the newest memory state: select-over-store unfolding
  // makes this quadratic in the chain length.
  shape("reads through the whole store chain", false,
        [](std::mt19937_64 &rng) { return large_formula(kLargeNodes / 16, rng, true); });
  l.detail = d.str() + " (limit " + fmt("%.0fs", kTaintSimplifySeconds) + ")";
  return l;
}

// ---------------------------------------------------------------------------

Line criterion7() {
  unsigned fired = 0, confirmed = 0, tries = 0;
  for (std::uint64_t seed = 5000; fired < kTrivial && tries < 10 * kTrivial; ++seed, ++tries) {
    TermStore s;
    std::mt19937_64 rng(seed);
    GenOptions go;
    go.target_leaf = 0;
    go.max_depth = 5;
    const Generated g = random_formula(s, go, rng);
    // quantify a target that does not occur
    const Term x = s.mk_var("x", s.bv_sort(2));
    Generated q = g;
    q.targets = {x};
    const Script sc = quantified_script(s, q);
    const Preprocessed pre = preprocess(s, sc);
    g_bound.add(pre, "trivial " + std::to_string(seed));
    if (!pre.trivial_wic)
      continue;
    ++fired;
    const TermSet ts{x};
    Universe u;
    u.seed = seed;
    confirmed += pre.is_wic && check_wic(s, g.phi, pre.sic, ts, u).ok;
  }

  // Independent but not provably so.
  TermStore s1;
  const Script tauto = parse_script(s1, "(assert (forall ((x (_ BitVec 4))) (or (bvslt x #x0) (bvsge x #x0))))");
  const Preprocessed p1 = preprocess(s1, tauto);
  g_bound.add(p1, "tautology");
  const Term x1 = s1.mk_var("x", s1.bv_sort(4));
  const Term m1 = parse_term(s1, "(or (bvslt x #x0) (bvsge x #x0))", std::span<const Term>(&x1, 1));
  const bool bottom1 = p1.sic == s1.mk_bool(false) && !p1.is_wic;
  const bool refuted = !check_wic(s1, m1, s1.mk_bool(false), TermSet{x1}).ok;

  TermStore s2;
  const Script uf = parse_script(s2, "(declare-fun a () (_ BitVec 4))(declare-fun f ((_ BitVec 4) (_ BitVec 4)) Bool)"
                                     "(assert (forall ((x (_ BitVec 4))) (f a x)))");
  const Preprocessed p2 = preprocess(s2, uf);
  g_bound.add(p2, "uninterpreted");
  const bool bottom2 = p2.sic == s2.mk_bool(false) && !p2.is_wic;

  Line l;
  l.pass = fired == kTrivial && confirmed == kTrivial && bottom1 && refuted && bottom2;
  l.detail = std::to_string(confirmed) + "/" + std::to_string(fired) + " trivial WICs confirmed; " +
             "(x<0)|(x>=0): sic " + print_term(s1, p1.sic) + (p1.is_wic ? " wic" : " not wic") +
             (refuted ? ", false refuted as WIC" : ", false NOT refuted") + "; f(a,x): sic " +
             print_term(s2, p2.sic) + (p2.is_wic ? " wic" : " not wic");
  return l;
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

Line criterion8(const fs::path &dir) {
  // Corpus: random quantified formulas, symbolic-execution scripts and their
  // benchgen quantifications.
  fs::create_directories(dir);
  for (unsigned i = 0; i < kCorpus; ++i) {
    TermStore s;
    std::mt19937_64 rng(20000 + i);
    std::string text;
    switch (i % 3) {
    case 0: {
      GenOptions go;
      go.max_width = 1 + i % 16;
      go.max_index_width = 1 + i % 5;
      text = print_script(s, quantified_script(s, random_formula(s, go, rng)));
      break;
    }
    case 1: text = ssa_script(rng, 1 + i % 5, 1 + i % 4); break;
    default: {
      const Script qf = parse_script(s, ssa_script(rng, 1 + i % 5, 1 + i % 4));
      QuantifyPlan plan;
      plan.select = QuantifyPlan::Select::All;
      text = print_script(s, quantify_arrays(s, qf, plan));
    }
    }
    std::ofstream(dir / ("c" + std::to_string(i) + ".smt2")) << text;
  }
  unsigned files = 0, same = 0;
  std::string first_diff;
  for (const auto &ent : fs::directory_iterator(dir)) {
    if (ent.path().extension() != ".smt2")
      continue;
    ++files;
    const std::string src = slurp(ent.path());
    for (bool share : {false, true}) {
      TermStore s1, s2;
      const std::string once = print_script(s1, parse_script(s1, src), {.share = share});
      const std::string twice = print_script(s2, parse_script(s2, once), {.share = share});
      if (once == twice) {
        same += share;
      } else if (first_diff.empty()) {
        first_diff = ent.path().filename().string();
        break;
      }
    }
  }

  // eval against z3 on ground instances: (assert (not (= t v))) must be unsat.
  unsigned agree = 0, ground = 0;
  std::string first_mismatch, solver_issue;
  if (g_z3) {
    std::ostringstream batch;
    std::vector<std::string> shown;
    for (unsigned i = 0; i < kGround; ++i) {
      TermStore s;
      std::mt19937_64 rng(40000 + i);
      GenOptions go;
      go.max_width = i % 2 ? 16 : 4;
      go.max_index_width = i % 2 ? 4 : 3;
      const Generated g = random_formula(s, go, rng);
      TermMap<Term> sub;
      for (Term v : free_vars(s, g.phi))
        sub.emplace(v, value_term(s, random_value(s, s.sort(v), rng)));
      const Term t = substitute(s, g.phi, sub);
      const Value v = eval(s, t, Model{});
      const std::string q = print_term(s, s.mk(Op::Not, {s.mk(Op::Eq, {t, s.mk_bool(v.bits)})}));
      batch << "(push 1)(assert " << q << ")(check-sat)(pop 1)\n";
      shown.push_back(q);
      ++ground;
    }
    const ProcessResult pr = run_process({"z3", "-in"}, batch.str(), 120);
    std::istringstream lines(pr.out);
    std::string line;
    for (unsigned i = 0; std::getline(lines, line) && i < ground; ++i) {
      if (line == "unsat")
        ++agree;
      else if (first_mismatch.empty())
        first_mismatch = line + " on " + shown[i];
    }
    if (pr.timed_out)
      solver_issue = "z3 timed out";
  } else {
    solver_issue = "z3 not available";
  }

  Line l;
  l.pass = files == kCorpus && same == kCorpus && first_diff.empty() && ground == kGround && agree == kGround;
  l.detail = std::to_string(same) + "/" + std::to_string(files) + " corpus files print-parse stable" +
             (first_diff.empty() ? "" : " (first difference " + first_diff + ")") + "; eval agrees with z3 on " +
             std::to_string(agree) + "/" + std::to_string(ground) + " ground instances" +
             (first_mismatch.empty() ? "" : " (first mismatch " + first_mismatch.substr(0, 300) + ")") +
             (solver_issue.empty() ? "" : "; " + solver_issue);
  return l;
}

template <class F> Line guarded(F &&f) {
  try {
    return f();
  } catch (const std::exception &e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

} // namespace

// Arguments: criterion numbers to run (default all), and optionally a
// directory in which to keep the corpus.
int main(int argc, char **argv) {
  g_z3 = have_z3();
  std::set<int> only;
  fs::path dir;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a.size() == 1 && a[0] >= '1' && a[0] <= '8')
      only.insert(a[0] - '0');
    else
      dir = a;
  }
  const bool keep = !dir.empty();
  if (!keep)
    dir = fs::temp_directory_path() / ("qsic-corpus-" + std::to_string(::getpid()));
  auto wanted = [&](int n) { return only.empty() || only.count(n); };

  int failed = 0, ran = 0;
  auto run = [&](int n, const char *name, const Line &l) {
    report(n, name, l);
    failed += !l.pass;
    ++ran;
  };
  if (wanted(1))
    run(1, "running example", guarded(criterion1));
  if (wanted(2) || wanted(3) || wanted(4))
    guarded([] {
      run_suite();
      return Line{};
    });
  if (wanted(2))
    run(2, "SIC soundness", guarded(criterion2));
  if (wanted(3))
    run(3, "model lifting", guarded(criterion3));
  if (wanted(4))
    run(4, "never-wrong unsat", guarded(criterion4));
  // 6 and 7 run before 5 so their preprocessing runs count towards the
  // size-bound tally.
  Line l6, l7;
  if (wanted(6) || wanted(5))
    l6 = guarded(criterion6);
  if (wanted(7) || wanted(5))
    l7 = guarded(criterion7);
  if (wanted(5))
    run(5, "size bound", guarded(criterion5));
  if (wanted(6))
    run(6, "preprocessing speed", l6);
  if (wanted(7))
    run(7, "WIC audit", l7);
  if (wanted(8))
    run(8, "round trip and differential eval", guarded([&] { return criterion8(dir); }));
  if (!keep)
    fs::remove_all(dir);
  std::printf("%d of %d criteria failed\n", failed, ran);
  return failed;
}
