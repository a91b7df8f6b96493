#pragma once

// Running an external quantifier-free solver and the full solve loop:
// preprocess, one solver call, interpret, lift the model.

#include "qsic/model.hpp"
#include "qsic/pipeline.hpp"
#include "qsic/smtlib.hpp"

#include <string>
#include <vector>

namespace qsic {

struct SolverConfig {
  // argv template; "{file}" is replaced by the script path. Without a
  // "{file}" argument the script goes to the solver's stdin.
  std::vector<std::string> command{"z3", "{file}"};
  double timeout = 30; // seconds
  bool produce_models = true;
};

// Splits a command line on whitespace, honouring single and double quotes.
std::vector<std::string> split_command(const std::string &text);

// Default config: QSIC_SOLVER (a command line) when set, else z3.
SolverConfig default_solver_config();

// Applies "solver.cmd = ..." and "solver.timeout = ..." lines ('#' starts a
// comment). Throws Error(Io) if unreadable, Error(InvalidArgument) on bad
// lines or a non-positive timeout.
void load_solver_config(const std::string &path, SolverConfig &cfg);

enum class Verdict { Sat, Unsat, Unknown };
const char *to_string(Verdict v);

struct QfVerdict {
  Verdict kind = Verdict::Unknown;
  Model model;        // Sat only
  double seconds = 0; // solver wall time
  std::string reason; // why Unknown: solver text, timeout, crash
};

// Prints script with (check-sat)(get-model) and runs the solver on it.
// "sat" followed by a model gives Sat, "unsat" gives Unsat, everything else
// (including timeouts and crashes) gives Unknown. Throws
// Error(SolverNotFound) when the executable cannot be started, Error(Io) on
// I/O failures, and the model parser's errors on a malformed model.
QfVerdict solve_qf(TermStore &store, const Script &qf_script, const SolverConfig &cfg);

// Fills symbols the solver left out of m with sort defaults (constant
// arrays and constant functions for function symbols).
void complete_model(TermStore &store, Model &m, const std::vector<Declaration> &decls);

// Drops eliminated variables and internal "qsic!" symbols and renames
// skolem constants back to their variable names. Every name in required must
// end up with a value (Error(MissingEntry) otherwise).
Model generalize_model(const TermStore &store, const Model &m, const std::vector<Term> &eliminated,
                       const std::vector<Skolem> &skolems,
                       const std::vector<std::string> &required = {});

struct RunReport {
  std::string file;
  std::uint64_t input_size = 0;  // shared size of the input matrix
  std::uint64_t output_size = 0; // shared size of matrix /\ SIC
  double size_ratio = 0;
  std::uint64_t input_bytes = 0;
  std::uint64_t output_bytes = 0;
  double taint_seconds = 0;
  double simplify_seconds = 0;
  double solver_seconds = 0;
  std::string verdict; // sat, unsat, unknown, or empty when not solved
  bool is_wic = false;
  bool trivial_wic = false;
  bool size_bound_holds = true;
  std::uint64_t size_bound_k = 0, size_bound_n = 0;
  std::string error;

  std::string to_json() const; // one line
};

// Fills the size and timing fields of a report from a preprocessing run.
// input_matrix is the conjoined input with its quantifier prefix removed.
void fill_report(TermStore &store, RunReport &r, Term input_matrix, const Preprocessed &pre);

struct SolveResult {
  Verdict verdict = Verdict::Unknown;
  Model model; // generalized, Sat only
  Preprocessed pre;
  QfVerdict qf;
  Script qf_script;
  RunReport report;
};

// The full loop with exactly one solver call. Unsat is reported only when
// the SIC is a WIC; otherwise an unsatisfiable strengthening is Unknown.
SolveResult solve_q(TermStore &store, const Script &input, const SolverConfig &cfg,
                    const PreprocessOptions &opts = {});

// As solve_q but decides the quantifier-free script with the brute-force
// enumerator instead of a subprocess.
SolveResult solve_q_enumerating(TermStore &store, const Script &input,
                                const PreprocessOptions &opts = {});

} // namespace qsic
