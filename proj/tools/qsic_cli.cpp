// qsic command line: preprocess, solve, check, benchgen (and the hidden
// enum-solve backend). Exit codes: 0 sat/success, 10 unsat, 20 unknown,
// 1 failed check, 2 input errors, 3 solver not found, 4 internal errors.

#include "qsic/qsic.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailedCheck = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

struct Ctx {
  qsic_context *p = qsic_context_new();
  ~Ctx() { qsic_context_free(p); }
};

struct Result {
  qsic_result *p = nullptr;
  ~Result() { qsic_result_free(p); }
};

int exit_for(qsic_status st) {
  switch (st) {
  case QSIC_OK: return 0;
  case QSIC_E_SOLVER_NOT_FOUND: return kExitSolver;
  case QSIC_E_INTERNAL: return kExitSolver + 1;
  default: return kExitInput;
  }
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error(path + ": cannot read");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a temporary sibling and renames, so readers never see a
// partial file.
void write_atomic(const std::string &path, const std::string &text) {
  const std::string tmp = path + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out || !(out << text))
      throw std::runtime_error(path + ": cannot write");
  }
  fs::rename(tmp, path);
}

// Every .smt2 file under path, sorted; or path itself.
std::vector<std::string> inputs_of(const std::string &path) {
  if (!fs::is_directory(path))
    return {path};
  std::vector<std::string> out;
  for (const auto &e : fs::recursive_directory_iterator(path))
    if (e.is_regular_file() && e.path().extension() == ".smt2")
      out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

// Runs job(i) for i < n on up to jobs threads.
template <class F> void parallel_for(std::size_t n, unsigned jobs, F &&job) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;)
        job(i);
    });
  for (std::size_t i; (i = next++) < n;)
    job(i);
  for (auto &th : pool)
    th.join();
}

struct Outcome {
  int code = 0;
  std::string out; // stdout text
  std::string err; // stderr text
};

std::string error_line(const std::string &file, qsic_status st, const qsic_context *ctx) {
  const std::string msg = qsic_last_error(ctx);
  const bool positioned = !msg.empty() && std::isdigit(static_cast<unsigned char>(msg[0]));
  return file + (positioned ? ":" : ": ") + msg + " [" + qsic_status_name(st) + "]\n";
}

std::string with_file(const std::string &json_lines, const std::string &file) {
  std::string out;
  std::istringstream in(json_lines);
  for (std::string line; std::getline(in, line);) {
    if (line.empty())
      continue;
    auto j = nlohmann::ordered_json::parse(line);
    nlohmann::ordered_json k;
    k["file"] = file;
    for (auto &[key, v] : j.items())
      if (key != "file")
        k[key] = v;
    out += k.dump() + "\n";
  }
  return out;
}

void append_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::app);
  if (!out || !(out << text))
    throw std::runtime_error(path + ": cannot write");
}

// Model text on one line: "(a #x1) (b #x0)" style is left to the define-funs.
std::string one_line(const std::string &text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty() && out.back() != '(' && c != ')')
      out += ' ';
    space = false;
    out += c;
  }
  return out;
}

const char *verdict_name(qsic_verdict v) {
  return v == QSIC_SAT ? "sat" : v == QSIC_UNSAT ? "unsat" : "unknown";
}

struct PreFlags {
  std::string targets = "all-universal";
  bool no_simplify = false;
  unsigned share_threshold = 2;
  bool declared_shadows = false;
  bool no_memo = false;
  std::string rules_file;
  std::string rules_text;

  void add(CLI::App *app) {
    app->add_option("--targets", targets,
                    "comma-separated target names, or all-universal")->capture_default_str();
    app->add_flag("--no-simplify", no_simplify, "skip simplification");
    app->add_option("--share-threshold", share_threshold,
                    "let-bind subterms occurring this often in output (0 or 1: off)")
        ->capture_default_str();
    app->add_flag("--declared-shadows", declared_shadows,
                  "declare shadow arrays instead of using constant arrays");
    app->add_flag("--no-memo", no_memo, "disable SIC memoization");
    app->add_option("--rules", rules_file, "file with extra (absorb ...) rules");
  }

  qsic_preprocess_options get() {
    qsic_preprocess_options o;
    qsic_preprocess_options_init(&o);
    o.simplify = !no_simplify;
    o.share_threshold = share_threshold;
    o.targets = targets == "all-universal" ? nullptr : targets.c_str();
    o.declared_shadows = declared_shadows;
    o.memoize = !no_memo;
    if (!rules_file.empty()) {
      rules_text = read_file(rules_file);
      o.rules = rules_text.c_str();
    }
    return o;
  }
};

struct SolverFlags {
  std::string command;
  double timeout = 30;
  std::string config;
  bool enumerate = false;

  void add(CLI::App *app) {
    app->add_option("--solver", command, "solver command, {file} is the script (default: $QSIC_SOLVER or z3)");
    app->add_option("--timeout", timeout, "solver timeout in seconds")->capture_default_str();
    app->add_option("--config", config, "key=value config (solver.cmd, solver.timeout); overrides flags");
    app->add_flag("--enumerate", enumerate, "decide the strengthened formula by enumeration");
  }

  qsic_solver_options get() const {
    qsic_solver_options o;
    qsic_solver_options_init(&o);
    o.command = command.empty() ? nullptr : command.c_str();
    o.timeout = timeout;
    o.config_file = config.empty() ? nullptr : config.c_str();
    o.enumerate = enumerate;
    return o;
  }
};

// Runs one outcome per input and prints them in input order; the exit code
// is the first nonzero one.
int run_batch(const std::vector<std::string> &files, unsigned jobs,
              const std::function<Outcome(const std::string &)> &one) {
  std::vector<Outcome> outs(files.size());
  parallel_for(files.size(), jobs, [&](std::size_t i) {
    try {
      outs[i] = one(files[i]);
    } catch (const std::exception &e) {
      outs[i] = {kExitInput, "", std::string(e.what()) + "\n"};
    }
  });
  int code = 0;
  for (const Outcome &o : outs) {
    std::cout << o.out;
    std::cerr << o.err;
    if (!code)
      code = o.code;
  }
  return code;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"qsic: solve universally quantified bitvector/array problems with one "
               "quantifier-free solver call"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qsic_version()));

  // preprocess
  auto *pre = app.add_subcommand("preprocess", "write the strengthened quantifier-free script");
  std::string pre_in, pre_out, pre_report;
  unsigned pre_jobs = 1;
  PreFlags pre_flags;
  pre->add_option("input", pre_in, "SMT-LIB file or directory")->required();
  pre->add_option("-o,--output", pre_out, "output file (directory in batch mode); default stdout");
  pre->add_option("--emit-report", pre_report, "append JSON report lines to this file");
  pre->add_option("--jobs", pre_jobs, "parallel files in batch mode");
  pre_flags.add(pre);

  // solve
  auto *solve = app.add_subcommand("solve", "preprocess and decide with one solver call");
  std::string solve_in, solve_report;
  bool solve_model = false, solve_check = false;
  unsigned solve_jobs = 1;
  PreFlags solve_pre;
  SolverFlags solve_flags;
  solve->add_option("input", solve_in, "SMT-LIB file or directory")->required();
  solve->add_flag("--model", solve_model, "print the generalized model");
  solve->add_option("--report", solve_report, "append JSON report lines to this file");
  solve->add_flag("--check", solve_check, "confirm the answer by enumeration (small widths)");
  solve->add_option("--jobs", solve_jobs, "parallel files in batch mode");
  solve_pre.add(solve);
  solve_flags.add(solve);

  // check
  auto *check = app.add_subcommand("check", "brute-force checks of the inferred (or given) SIC");
  std::string check_in, check_sic;
  unsigned check_widths = 0, check_jobs = 1;
  std::uint64_t check_seed = 1;
  bool check_lift = false, check_json = false;
  PreFlags check_pre;
  SolverFlags check_solver;
  check->add_option("input", check_in, "SMT-LIB file or directory")->required();
  check->add_option("--widths", check_widths, "narrow bitvectors to this width first");
  check->add_option("--sic", check_sic, "file with the SIC to check (a term or a script; last assertion)");
  check->add_flag("--lift", check_lift, "also solve and check the lifted model");
  check->add_flag("--json", check_json, "JSON lines output");
  check->add_option("--seed", check_seed, "sampling seed")->capture_default_str();
  check->add_option("--jobs", check_jobs, "parallel files in batch mode");
  check_pre.add(check);
  check_solver.add(check);

  // benchgen
  auto *bench = app.add_subcommand("benchgen", "universally quantify array variables");
  std::string bench_in, bench_out, bench_select = "unwritten";
  std::uint64_t bench_seed = 0;
  unsigned bench_min = 0, bench_jobs = 1;
  bench->add_option("input", bench_in, "QF SMT-LIB file or directory")->required();
  bench->add_option("-o,--output", bench_out, "output file or directory; default stdout");
  bench->add_option("--select", bench_select, "unwritten, all, count:N or comma-separated globs")
      ->capture_default_str();
  bench->add_option("--seed", bench_seed, "seed for count:N")->capture_default_str();
  bench->add_option("--min", bench_min, "fail when fewer arrays are selected");
  bench->add_option("--jobs", bench_jobs, "parallel files in batch mode");

  // enum-solve: a second, independent backend for cross-checks
  auto *enum_solve = app.add_subcommand("enum-solve", "decide a small script by enumeration");
  enum_solve->group("");
  std::string enum_in;
  std::uint64_t enum_budget = 1u << 22;
  enum_solve->add_option("input", enum_in)->required();
  enum_solve->add_option("--budget", enum_budget);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pre) {
      const auto files = inputs_of(pre_in);
      const bool batch = files.size() != 1 || fs::is_directory(pre_in);
      if (batch && pre_out.empty())
        throw std::runtime_error("batch mode needs -o <directory>");
      if (batch)
        fs::create_directories(pre_out);
      qsic_preprocess_options o = pre_flags.get();
      std::mutex report_mu;
      return run_batch(files, pre_jobs, [&](const std::string &f) {
        Ctx ctx;
        Result r;
        const std::string text = read_file(f);
        const qsic_status st = qsic_preprocess(ctx.p, text.c_str(), &o, &r.p);
        if (st != QSIC_OK)
          return Outcome{exit_for(st), "", error_line(f, st, ctx.p)};
        const std::string report = with_file(qsic_result_report(r.p), f);
        Outcome out;
        if (batch)
          write_atomic((fs::path(pre_out) / fs::path(f).filename()).string(), qsic_result_output(r.p));
        else if (!pre_out.empty())
          write_atomic(pre_out, qsic_result_output(r.p));
        else
          out.out = qsic_result_output(r.p);
        if (!pre_report.empty()) {
          std::lock_guard lock(report_mu);
          append_file(pre_report, report);
        }
        return out;
      });
    }

    if (*solve) {
      const auto files = inputs_of(solve_in);
      const bool batch = files.size() != 1 || fs::is_directory(solve_in);
      qsic_preprocess_options po = solve_pre.get();
      const qsic_solver_options so = solve_flags.get();
      std::mutex report_mu;
      const int code = run_batch(files, solve_jobs, [&](const std::string &f) {
        Ctx ctx;
        Result r;
        const std::string text = read_file(f);
        qsic_status st;
        if (solve_check) {
          qsic_check_options co;
          qsic_check_options_init(&co);
          co.lift = 1;
          st = qsic_check(ctx.p, text.c_str(), &po, &co, &so, &r.p);
        } else {
          st = qsic_solve(ctx.p, text.c_str(), &po, &so, &r.p);
        }
        if (st != QSIC_OK)
          return Outcome{exit_for(st), "", error_line(f, st, ctx.p)};
        Outcome out;
        const qsic_verdict v = qsic_result_verdict(r.p);
        // one verdict per file in batch mode; only errors set the exit code
        out.code = batch ? 0 : static_cast<int>(v);
        out.out = batch ? f + ": " + verdict_name(v) + "\n" : std::string(verdict_name(v)) + "\n";
        if (solve_model && v == QSIC_SAT)
          out.out += qsic_result_model(r.p);
        if (solve_check) {
          std::istringstream lines(qsic_result_report(r.p));
          for (std::string line; std::getline(lines, line);) {
            const auto j = nlohmann::json::parse(line);
            if (j["check"] == "lifted" && j.contains("result"))
              out.out += "check: " + j["result"].get<std::string>() + "\n";
          }
          if (!qsic_result_check_ok(r.p))
            out.code = kExitFailedCheck;
        }
        if (!solve_report.empty()) {
          std::lock_guard lock(report_mu);
          append_file(solve_report, with_file(qsic_result_report(r.p), f));
        }
        return out;
      });
      return code;
    }

    if (*check) {
      const auto files = inputs_of(check_in);
      qsic_preprocess_options po = check_pre.get();
      const qsic_solver_options so = check_solver.get();
      const std::string sic_text = check_sic.empty() ? std::string() : read_file(check_sic);
      return run_batch(files, check_jobs, [&](const std::string &f) {
        Ctx ctx;
        Result r;
        const std::string text = read_file(f);
        qsic_check_options co;
        qsic_check_options_init(&co);
        co.widths = check_widths;
        co.sic = check_sic.empty() ? nullptr : sic_text.c_str();
        co.lift = check_lift;
        co.seed = check_seed;
        const qsic_status st = qsic_check(ctx.p, text.c_str(), &po, &co, &so, &r.p);
        if (st != QSIC_OK)
          return Outcome{exit_for(st), "", error_line(f, st, ctx.p)};
        Outcome out;
        out.code = qsic_result_check_ok(r.p) ? 0 : kExitFailedCheck;
        if (check_json) {
          out.out = with_file(qsic_result_report(r.p), f);
          return out;
        }
        std::istringstream lines(qsic_result_report(r.p));
        const std::string prefix = files.size() > 1 ? f + ": " : "";
        for (std::string line; std::getline(lines, line);) {
          const auto j = nlohmann::json::parse(line);
          std::string text_line = prefix + j["check"].get<std::string>() + ": ";
          text_line += j.contains("result") ? j["result"].get<std::string>() : j["verdict"].get<std::string>();
          if (j.value("sampled", false))
            text_line += " (sampled)";
          if (j["check"] == "wic")
            text_line += j["claimed"].get<bool>() ? " (claimed)" : " (not claimed)";
          out.out += text_line + "\n";
          // witnesses for failures that matter; an unclaimed WIC is only informative
          if (j.contains("witness") && (j["check"] != "wic" || j["claimed"].get<bool>())) {
            out.out += "  at " + one_line(j["witness"].get<std::string>()) + "\n";
            const auto &t = j["targets"];
            if (j["check"] == "sic" && t.size() == 3)
              out.out += "  sic holds at " + one_line(t[0].get<std::string>()) +
                         "\n  formula differs between " + one_line(t[1].get<std::string>()) +
                         " and " + one_line(t[2].get<std::string>()) + "\n";
            else
              for (const auto &m : t)
                out.out += "  targets " + one_line(m.get<std::string>()) + "\n";
          }
        }
        return out;
      });
    }

    if (*bench) {
      const auto files = inputs_of(bench_in);
      const bool batch = files.size() != 1 || fs::is_directory(bench_in);
      if (batch && bench_out.empty())
        throw std::runtime_error("batch mode needs -o <directory>");
      if (batch)
        fs::create_directories(bench_out);
      return run_batch(files, bench_jobs, [&](const std::string &f) {
        Ctx ctx;
        Result r;
        const std::string text = read_file(f);
        const qsic_status st = qsic_benchgen(ctx.p, text.c_str(), bench_select.c_str(), bench_seed,
                                             bench_min, &r.p);
        if (st != QSIC_OK)
          return Outcome{exit_for(st), "", error_line(f, st, ctx.p)};
        Outcome out;
        if (batch) {
          const fs::path rel = fs::relative(f, bench_in);
          const fs::path dest = fs::path(bench_out) / rel;
          fs::create_directories(dest.parent_path());
          write_atomic(dest.string(), qsic_result_output(r.p));
          out.out = with_file(qsic_result_report(r.p), f);
        } else if (!bench_out.empty()) {
          write_atomic(bench_out, qsic_result_output(r.p));
        } else {
          out.out = qsic_result_output(r.p);
        }
        return out;
      });
    }

    if (*enum_solve) {
      Ctx ctx;
      Result r;
      const std::string text = read_file(enum_in);
      const qsic_status st = qsic_enum_solve(ctx.p, text.c_str(), enum_budget, &r.p);
      if (st != QSIC_OK) {
        std::cerr << error_line(enum_in, st, ctx.p);
        return exit_for(st);
      }
      // solver-style output so the driver can use this as a backend
      const qsic_verdict v = qsic_result_verdict(r.p);
      std::cout << verdict_name(v) << "\n";
      if (v == QSIC_SAT)
        std::cout << "(\n" << qsic_result_model(r.p) << ")\n";
      return static_cast<int>(v);
    }
  } catch (const std::exception &e) {
    std::cerr << "qsic: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
