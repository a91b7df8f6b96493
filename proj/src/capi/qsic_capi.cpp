#include "qsic/qsic.h"

#include "qsic/benchgen.hpp"
#include "qsic/checker.hpp"
#include "qsic/error.hpp"
#include "qsic/sexpr.hpp"
#include "qsic/solver.hpp"

#include <json.hpp>

#include <cstring>
#include <new>
#include <sstream>

struct qsic_context {
  std::string error;
};

struct qsic_result {
  std::string output, sic, model, report;
  int is_wic = 0;
  qsic_verdict verdict = QSIC_UNKNOWN;
  int check_ok = 1;
};

using namespace qsic;

namespace {

static_assert(static_cast<int>(ErrorKind::Internal) + 1 == QSIC_E_INTERNAL,
              "status codes mirror ErrorKind");

qsic_status status_of(ErrorKind k) { return static_cast<qsic_status>(static_cast<int>(k) + 1); }

// Runs body, turning exceptions into a status and a context message.
template <class F> qsic_status guarded(qsic_context *ctx, qsic_result **out, F &&body) {
  if (!ctx)
    return QSIC_E_INVALID_ARGUMENT;
  ctx->error.clear();
  if (!out) {
    ctx->error = "result pointer is null";
    return QSIC_E_INVALID_ARGUMENT;
  }
  *out = nullptr;
  try {
    auto r = std::make_unique<qsic_result>();
    body(*r);
    *out = r.release();
    return QSIC_OK;
  } catch (const Error &e) {
    ctx->error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc &) {
    ctx->error = "out of memory";
  } catch (const std::exception &e) {
    ctx->error = e.what();
  }
  return QSIC_E_INTERNAL;
}

std::string need_text(const char *p, const char *what) {
  if (!p)
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " is null");
  return p;
}

std::vector<std::string> split_names(const char *text) {
  std::vector<std::string> out;
  if (!text)
    return out;
  std::string cur;
  for (const char *c = text;; ++c) {
    if (*c == ',' || *c == '\0') {
      const auto b = cur.find_first_not_of(" \t");
      if (b != std::string::npos)
        out.push_back(cur.substr(b, cur.find_last_not_of(" \t") - b + 1));
      cur.clear();
      if (!*c)
        break;
    } else {
      cur += *c;
    }
  }
  return out;
}

// Options plus the registry they point into.
struct Prep {
  AbsorptionRegistry registry = AbsorptionRegistry::builtin();
  PreprocessOptions opts;
  unsigned share_threshold = 2;

  explicit Prep(const qsic_preprocess_options *o) {
    qsic_preprocess_options d;
    qsic_preprocess_options_init(&d);
    if (!o)
      o = &d;
    opts.simplify = o->simplify != 0;
    share_threshold = o->share_threshold;
    opts.share_threshold = share_threshold;
    opts.targets = split_names(o->targets);
    opts.sic.shadow = o->declared_shadows ? ShadowMode::Declared : ShadowMode::ConstArray;
    opts.sic.memoize = o->memoize != 0;
    if (o->rules)
      registry.add_text(o->rules);
    opts.registry = &registry;
  }

  PrintOptions print() const {
    PrintOptions p;
    p.share = share_threshold >= 2;
    p.share_threshold = share_threshold < 2 ? 2 : share_threshold;
    return p;
  }
};

SolverConfig solver_config(const qsic_solver_options *o) {
  SolverConfig cfg = default_solver_config();
  if (!o)
    return cfg;
  if (o->command) {
    cfg.command = split_command(o->command);
    if (cfg.command.empty())
      throw Error(ErrorKind::InvalidArgument, "empty solver command");
  }
  if (o->timeout != 0) {
    if (!(o->timeout > 0))
      throw Error(ErrorKind::InvalidArgument, "timeout must be positive");
    cfg.timeout = o->timeout;
  }
  if (o->config_file)
    load_solver_config(o->config_file, cfg);
  return cfg;
}

qsic_verdict c_verdict(Verdict v) {
  switch (v) {
  case Verdict::Sat: return QSIC_SAT;
  case Verdict::Unsat: return QSIC_UNSAT;
  case Verdict::Unknown: break;
  }
  return QSIC_UNKNOWN;
}

SolveResult run_solver(TermStore &s, const Script &sc, const Prep &p,
                       const qsic_solver_options *sopts) {
  if (sopts && sopts->enumerate)
    return solve_q_enumerating(s, sc, p.opts);
  return solve_q(s, sc, solver_config(sopts), p.opts);
}

// The SIC given as a term, or as a script whose last assertion is taken.
Term parse_sic(TermStore &s, const std::string &text) {
  SExprArena ar;
  const auto top = ar.read(text);
  std::string term_text = text;
  for (std::uint32_t id : top) {
    const SNode &n = ar[id];
    if (n.kind == SKind::List && n.items.size() == 2 && ar.is_symbol(n.items[0], "assert"))
      term_text = ar.to_text(n.items[1]);
  }
  return parse_term(s, term_text);
}

nlohmann::ordered_json check_json(const TermStore &s, const char *check, const CheckResult &r,
                                  const char *pass, const char *fail) {
  nlohmann::ordered_json j;
  j["check"] = check;
  j["result"] = r.ok ? pass : fail;
  j["sampled"] = r.sampled;
  j["evaluations"] = r.evaluations;
  if (!r.ok) {
    j["witness"] = print_model(s, r.witness);
    auto &t = j["targets"] = nlohmann::ordered_json::array();
    for (const Model &m : r.targets)
      t.push_back(print_model(s, m));
    j["detail"] = r.detail;
  }
  return j;
}

} // namespace

extern "C" {

const char *qsic_version(void) { return "1.0.0"; }

const char *qsic_status_name(qsic_status st) {
  if (st == QSIC_OK)
    return "ok";
  if (st < QSIC_E_PARSE || st > QSIC_E_INTERNAL)
    return "unknown-status";
  return to_string(static_cast<ErrorKind>(static_cast<int>(st) - 1));
}

qsic_context *qsic_context_new(void) { return new (std::nothrow) qsic_context; }
void qsic_context_free(qsic_context *ctx) { delete ctx; }
const char *qsic_last_error(const qsic_context *ctx) { return ctx ? ctx->error.c_str() : ""; }

void qsic_preprocess_options_init(qsic_preprocess_options *o) {
  if (!o)
    return;
  *o = qsic_preprocess_options{};
  o->simplify = 1;
  o->share_threshold = 2;
  o->memoize = 1;
}

void qsic_solver_options_init(qsic_solver_options *o) {
  if (o)
    *o = qsic_solver_options{};
}

void qsic_check_options_init(qsic_check_options *o) {
  if (!o)
    return;
  *o = qsic_check_options{};
  o->seed = 1;
}

qsic_status qsic_preprocess(qsic_context *ctx, const char *smt2,
                            const qsic_preprocess_options *popts, qsic_result **out) {
  return guarded(ctx, out, [&](qsic_result &r) {
    const std::string text = need_text(smt2, "input");
    TermStore s;
    Prep p(popts);
    const Script sc = parse_script(s, text);
    const Term input_matrix = prenex(s, conjoin_assertions(s, sc)).matrix;
    const Preprocessed pre = preprocess(s, sc, p.opts);
    const Script outsc = output_script(s, sc, pre);
    r.output = print_script(s, outsc, p.print());
    r.sic = print_term(s, pre.sic);
    r.is_wic = pre.is_wic;
    RunReport rep;
    fill_report(s, rep, input_matrix, pre);
    rep.input_bytes = text.size();
    rep.output_bytes = r.output.size();
    r.report = rep.to_json() + "\n";
  });
}

qsic_status qsic_solve(qsic_context *ctx, const char *smt2, const qsic_preprocess_options *popts,
                       const qsic_solver_options *sopts, qsic_result **out) {
  return guarded(ctx, out, [&](qsic_result &r) {
    const std::string text = need_text(smt2, "input");
    TermStore s;
    Prep p(popts);
    const Script sc = parse_script(s, text);
    SolveResult res = run_solver(s, sc, p, sopts);
    r.output = print_script(s, res.qf_script, p.print());
    r.sic = print_term(s, res.pre.sic);
    r.is_wic = res.pre.is_wic;
    r.verdict = c_verdict(res.verdict);
    if (res.verdict == Verdict::Sat)
      r.model = print_model(s, res.model);
    res.report.input_bytes = text.size();
    r.report = res.report.to_json() + "\n";
  });
}

qsic_status qsic_check(qsic_context *ctx, const char *smt2, const qsic_preprocess_options *popts,
                       const qsic_check_options *copts, const qsic_solver_options *sopts,
                       qsic_result **out) {
  return guarded(ctx, out, [&](qsic_result &r) {
    const std::string text = need_text(smt2, "input");
    qsic_check_options dflt;
    qsic_check_options_init(&dflt);
    if (!copts)
      copts = &dflt;
    TermStore s;
    Prep p(popts);
    Script sc = parse_script(s, text);
    if (copts->widths)
      sc = rescale_script(s, sc, copts->widths);
    const Preprocessed pre = preprocess(s, sc, p.opts);
    const bool own_sic = copts->sic != nullptr;
    const Term sic = own_sic ? parse_sic(s, copts->sic) : pre.sic;
    r.sic = print_term(s, sic);
    r.is_wic = pre.is_wic && !own_sic;
    Universe u;
    u.seed = copts->seed;

    std::ostringstream lines;
    const CheckResult cs = check_sic(s, pre.matrix, sic, pre.targets, u);
    lines << check_json(s, "sic", cs, "valid", "counterexample").dump() << "\n";
    r.check_ok = cs.ok;

    const CheckResult cw = check_wic(s, pre.matrix, sic, pre.targets, u);
    auto jw = check_json(s, "wic", cw, "confirmed", "refuted");
    jw["claimed"] = static_cast<bool>(r.is_wic);
    lines << jw.dump() << "\n";
    if (r.is_wic && !cw.ok)
      r.check_ok = 0;

    if (copts->lift) {
      // A fresh store, so that bound variable names are those of a plain
      // solve run.
      TermStore s2;
      Script sc2 = parse_script(s2, text);
      if (copts->widths)
        sc2 = rescale_script(s2, sc2, copts->widths);
      const Term original2 = conjoin_assertions(s2, sc2);
      SolveResult res = run_solver(s2, sc2, p, sopts);
      r.verdict = c_verdict(res.verdict);
      nlohmann::ordered_json jl;
      jl["check"] = "lifted";
      jl["verdict"] = to_string(res.verdict);
      if (res.verdict == Verdict::Sat) {
        r.model = print_model(s2, res.model);
        const CheckResult cl = check_lifted_model(s2, original2, res.model, u);
        jl = check_json(s2, "lifted", cl, "ok", "violated");
        jl["verdict"] = "sat";
        r.check_ok = r.check_ok && cl.ok;
      } else if (res.verdict == Verdict::Unsat) {
        // unsat is only claimed with a WIC; confirm it when enumerable
        const BruteResult b = brute_force_solve(s2, original2);
        jl["result"] = b.verdict == BruteVerdict::Unsat ? "confirmed"
                       : b.verdict == BruteVerdict::Sat ? "refuted"
                                                        : "not-enumerable";
        r.check_ok = r.check_ok && b.verdict != BruteVerdict::Sat;
      }
      lines << jl.dump() << "\n";
    }
    r.report = lines.str();
  });
}

qsic_status qsic_benchgen(qsic_context *ctx, const char *smt2, const char *selection,
                          uint64_t seed, unsigned min_selected, qsic_result **out) {
  return guarded(ctx, out, [&](qsic_result &r) {
    const std::string text = need_text(smt2, "input");
    TermStore s;
    const Script sc = parse_script(s, text);
    QuantifyPlan plan;
    if (selection)
      parse_selection(selection, plan);
    plan.seed = seed;
    plan.min_selected = min_selected;
    const std::vector<std::string> chosen = select_arrays(s, sc, plan);
    r.output = print_script(s, quantify_arrays(s, sc, plan));
    nlohmann::ordered_json j;
    j["quantified"] = chosen;
    r.report = j.dump() + "\n";
  });
}

qsic_status qsic_enum_solve(qsic_context *ctx, const char *smt2, uint64_t budget,
                            qsic_result **out) {
  return guarded(ctx, out, [&](qsic_result &r) {
    const std::string text = need_text(smt2, "input");
    TermStore s;
    const Script sc = parse_script(s, text);
    const BruteResult b = brute_force_solve(s, conjoin_assertions(s, sc), budget ? budget : 1u << 22);
    switch (b.verdict) {
    case BruteVerdict::Sat: {
      r.verdict = QSIC_SAT;
      Model m = b.model;
      complete_model(s, m, sc.decls);
      r.model = print_model(s, m);
      break;
    }
    case BruteVerdict::Unsat:
      r.verdict = QSIC_UNSAT;
      break;
    case BruteVerdict::Unknown:
      r.verdict = QSIC_UNKNOWN;
      break;
    }
    nlohmann::ordered_json j;
    j["verdict"] = r.verdict == QSIC_SAT ? "sat" : r.verdict == QSIC_UNSAT ? "unsat" : "unknown";
    j["evaluations"] = b.evaluations;
    r.report = j.dump() + "\n";
  });
}

const char *qsic_result_output(const qsic_result *r) { return r ? r->output.c_str() : ""; }
const char *qsic_result_sic(const qsic_result *r) { return r ? r->sic.c_str() : ""; }
int qsic_result_is_wic(const qsic_result *r) { return r ? r->is_wic : 0; }
qsic_verdict qsic_result_verdict(const qsic_result *r) { return r ? r->verdict : QSIC_UNKNOWN; }
const char *qsic_result_model(const qsic_result *r) { return r ? r->model.c_str() : ""; }
const char *qsic_result_report(const qsic_result *r) { return r ? r->report.c_str() : ""; }
int qsic_result_check_ok(const qsic_result *r) { return r ? r->check_ok : 0; }
void qsic_result_free(qsic_result *r) { delete r; }

} // extern "C"
