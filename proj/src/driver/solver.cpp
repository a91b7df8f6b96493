#include "qsic/solver.hpp"

#include "qsic/checker.hpp"
#include "qsic/error.hpp"
#include "qsic/normalize.hpp"
#include "qsic/term_util.hpp"
#include "subprocess.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace qsic {

const char *to_string(Verdict v) {
  switch (v) {
  case Verdict::Sat: return "sat";
  case Verdict::Unsat: return "unsat";
  case Verdict::Unknown: return "unknown";
  }
  return "unknown";
}

std::vector<std::string> split_command(const std::string &text) {
  std::vector<std::string> out;
  std::string cur;
  bool have = false;
  char quote = 0;
  for (char c : text) {
    if (quote) {
      if (c == quote)
        quote = 0;
      else
        cur += c;
    } else if (c == '\'' || c == '"') {
      quote = c;
      have = true;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (have)
        out.push_back(cur);
      cur.clear();
      have = false;
    } else {
      cur += c;
      have = true;
    }
  }
  if (quote)
    throw Error(ErrorKind::InvalidArgument, "unterminated quote in command '" + text + "'");
  if (have)
    out.push_back(cur);
  return out;
}

SolverConfig default_solver_config() {
  SolverConfig cfg;
  if (const char *env = std::getenv("QSIC_SOLVER"); env && *env)
    cfg.command = split_command(env);
  return cfg;
}

void load_solver_config(const std::string &path, SolverConfig &cfg) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::Io, "cannot read config '" + path + "'");
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty())
      continue;
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos)
      throw Error(ErrorKind::InvalidArgument, where + "expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "solver.cmd") {
      cfg.command = split_command(value);
      if (cfg.command.empty())
        throw Error(ErrorKind::InvalidArgument, where + "empty solver.cmd");
    } else if (key == "solver.timeout") {
      char *end = nullptr;
      const double t = std::strtod(value.c_str(), &end);
      if (end == value.c_str() || *end || !(t > 0))
        throw Error(ErrorKind::InvalidArgument, where + "solver.timeout must be a positive number");
      cfg.timeout = t;
    } else {
      throw Error(ErrorKind::InvalidArgument, where + "unknown key '" + key + "'");
    }
  }
}

namespace {

class TempFile {
public:
  explicit TempFile(const std::string &content) {
    const char *dir = std::getenv("TMPDIR");
    std::string tmpl = std::string(dir && *dir ? dir : "/tmp") + "/qsic-XXXXXX.smt2";
    const int fd = ::mkstemps(tmpl.data(), 5);
    if (fd < 0)
      throw Error(ErrorKind::Io, "cannot create a temporary file in " + tmpl);
    path_ = tmpl;
    std::size_t off = 0;
    while (off < content.size()) {
      const ssize_t k = ::write(fd, content.data() + off, content.size() - off);
      if (k <= 0) {
        ::close(fd);
        throw Error(ErrorKind::Io, "cannot write " + path_);
      }
      off += static_cast<std::size_t>(k);
    }
    ::close(fd);
  }
  ~TempFile() { ::unlink(path_.c_str()); }
  const std::string &path() const { return path_; }

private:
  std::string path_;
};

// First whitespace-delimited token and the remainder.
std::pair<std::string, std::string_view> first_token(std::string_view text) {
  std::size_t b = 0;
  while (b < text.size() && std::isspace(static_cast<unsigned char>(text[b])))
    ++b;
  std::size_t e = b;
  while (e < text.size() && !std::isspace(static_cast<unsigned char>(text[e])))
    ++e;
  return {std::string(text.substr(b, e - b)), text.substr(e)};
}

} // namespace

QfVerdict solve_qf(TermStore &s, const Script &qf, const SolverConfig &cfg) {
  if (!(cfg.timeout > 0))
    throw Error(ErrorKind::InvalidArgument, "solver timeout must be positive");
  for (const Assertion &a : qf.assertions)
    if (has_quantifier(s, a.term))
      throw Error(ErrorKind::InvalidArgument, "solve_qf needs a quantifier-free script");
  Script sc = qf;
  sc.commands = {"check-sat"};
  if (cfg.produce_models) {
    sc.options.emplace_back(":produce-models", "true");
    sc.commands.push_back("get-model");
  }
  const std::string text = print_script(s, sc);

  std::vector<std::string> argv;
  bool via_file = false;
  for (const std::string &a : cfg.command) {
    via_file = via_file || a.find("{file}") != std::string::npos;
    argv.push_back(a);
  }
  std::optional<TempFile> file;
  if (via_file) {
    file.emplace(text);
    for (std::string &a : argv)
      for (std::size_t p; (p = a.find("{file}")) != std::string::npos;)
        a.replace(p, 6, file->path());
  }
  ProcessResult pr = run_process(argv, via_file ? std::nullopt : std::optional(text), cfg.timeout);

  QfVerdict v;
  v.seconds = pr.seconds;
  if (pr.timed_out) {
    v.reason = "timeout after " + std::to_string(cfg.timeout) + "s";
    return v;
  }
  auto [tok, rest] = first_token(pr.out);
  if (tok == "sat") {
    v.kind = Verdict::Sat;
    if (cfg.produce_models)
      v.model = parse_model(s, rest);
  } else if (tok == "unsat") {
    v.kind = Verdict::Unsat;
  } else {
    std::string why = tok.empty() ? pr.err : std::string(pr.out);
    if (why.size() > 400)
      why.resize(400);
    v.reason = pr.signaled ? "solver crashed" : "solver said: " + why;
  }
  return v;
}

void complete_model(TermStore &s, Model &m, const std::vector<Declaration> &decls) {
  for (const Declaration &d : decls) {
    if (m.contains(d.name))
      continue;
    if (d.sig.domain.empty()) {
      m.constants.emplace(d.name, default_value(s, d.sig.range));
    } else {
      FunValue f;
      f.sig = d.sig;
      f.default_value = default_value(s, d.sig.range);
      m.functions.emplace(d.name, std::move(f));
    }
  }
}

Model generalize_model(const TermStore &s, const Model &m, const std::vector<Term> &eliminated,
                       const std::vector<Skolem> &skolems,
                       const std::vector<std::string> &required) {
  Model out = m;
  for (Term v : eliminated)
    out.erase(s.name(v));
  for (const Skolem &k : skolems) {
    const std::string from(s.name(k.constant)), to(s.name(k.var));
    if (const Value *val = m.find(from))
      out.constants[to] = *val;
  }
  for (auto it = out.constants.begin(); it != out.constants.end();)
    it = it->first.rfind("qsic!", 0) == 0 ? out.constants.erase(it) : std::next(it);
  for (auto it = out.functions.begin(); it != out.functions.end();)
    it = it->first.rfind("qsic!", 0) == 0 ? out.functions.erase(it) : std::next(it);
  for (const std::string &name : required)
    if (!out.contains(name))
      throw Error(ErrorKind::MissingEntry, "model has no value for '" + name + "'");
  return out;
}

std::string RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["file"] = file;
  j["input_size"] = input_size;
  j["output_size"] = output_size;
  j["size_ratio"] = size_ratio;
  j["input_bytes"] = input_bytes;
  j["output_bytes"] = output_bytes;
  j["taint_seconds"] = taint_seconds;
  j["simplify_seconds"] = simplify_seconds;
  j["solver_seconds"] = solver_seconds;
  j["verdict"] = verdict;
  j["is_wic"] = is_wic;
  j["trivial_wic"] = trivial_wic;
  j["size_bound_holds"] = size_bound_holds;
  j["size_bound_k"] = size_bound_k;
  j["size_bound_n"] = size_bound_n;
  if (!error.empty())
    j["error"] = error;
  return j.dump();
}

void fill_report(TermStore &s, RunReport &r, Term input_matrix, const Preprocessed &pre) {
  r.input_size = shared_size(s, expand_lets(s, input_matrix));
  r.output_size = shared_size(s, pre.output);
  r.size_ratio = r.input_size ? double(r.output_size) / double(r.input_size) : 0;
  r.taint_seconds = pre.taint_seconds;
  r.simplify_seconds = pre.simplify_seconds;
  r.is_wic = pre.is_wic;
  r.trivial_wic = pre.trivial_wic;
  r.size_bound_holds = pre.bound.holds();
  r.size_bound_k = pre.bound.k;
  r.size_bound_n = pre.bound.n;
}

namespace {

template <class Decide>
SolveResult solve_with(TermStore &s, const Script &input, const PreprocessOptions &opts,
                       Decide &&decide) {
  SolveResult r;
  const Term conj = conjoin_assertions(s, input);
  const Term input_matrix = prenex(s, conj).matrix;
  r.pre = preprocess(s, input, opts);
  r.qf_script = output_script(s, input, r.pre);
  fill_report(s, r.report, input_matrix, r.pre);
  r.report.input_bytes = print_script(s, input).size();
  r.report.output_bytes = print_script(s, r.qf_script).size();

  r.qf = decide(r.qf_script);
  r.report.solver_seconds = r.qf.seconds;
  switch (r.qf.kind) {
  case Verdict::Sat: {
    complete_model(s, r.qf.model, r.qf_script.decls);
    std::vector<std::string> required;
    for (const Declaration &d : input.decls)
      required.push_back(d.name);
    r.model = generalize_model(s, r.qf.model, r.pre.eliminated, r.pre.skolems, required);
    r.verdict = Verdict::Sat;
    break;
  }
  case Verdict::Unsat:
    // Without a WIC the strengthened formula may be unsat while the
    // original is not.
    r.verdict = r.pre.is_wic ? Verdict::Unsat : Verdict::Unknown;
    break;
  case Verdict::Unknown:
    r.verdict = Verdict::Unknown;
    break;
  }
  r.report.verdict = to_string(r.verdict);
  return r;
}

} // namespace

SolveResult solve_q(TermStore &s, const Script &input, const SolverConfig &cfg,
                    const PreprocessOptions &opts) {
  return solve_with(s, input, opts, [&](const Script &qf) { return solve_qf(s, qf, cfg); });
}

SolveResult solve_q_enumerating(TermStore &s, const Script &input, const PreprocessOptions &opts) {
  return solve_with(s, input, opts, [&](const Script &qf) {
    const auto t0 = std::chrono::steady_clock::now();
    QfVerdict v;
    const BruteResult b = brute_force_solve(s, conjoin_assertions(s, qf));
    v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (b.verdict == BruteVerdict::Sat) {
      v.kind = Verdict::Sat;
      v.model = b.model;
    } else if (b.verdict == BruteVerdict::Unsat) {
      v.kind = Verdict::Unsat;
    } else {
      v.reason = "domain too large to enumerate";
    }
    return v;
  });
}

} // namespace qsic
