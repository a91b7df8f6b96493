#pragma once

#include <optional>
#include <string>
#include <vector>

namespace qsic {

struct ProcessResult {
  bool timed_out = false;
  bool signaled = false;
  int exit_code = 0;
  std::string out, err;
  double seconds = 0;
};

// Runs argv with stdin_text on stdin (or /dev/null), collecting stdout and
// stderr. Past timeout seconds the whole process group is killed. Throws
// Error(SolverNotFound) if exec fails, Error(Io) on pipe/fork failures.
ProcessResult run_process(const std::vector<std::string> &argv,
                          const std::optional<std::string> &stdin_text, double timeout);

} // namespace qsic
