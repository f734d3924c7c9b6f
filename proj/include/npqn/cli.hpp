#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace npqn {

struct CliConfig {
  std::string command;
  std::string problem;
  std::optional<int> n;
  /// npqna, pqna, npga or all.
  std::string algo = "npqna";
  std::string suite = "table1";
  int starts = 100;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir;
  /// SolverConfig keys, applied in order over the benchmark preset.
  std::map<std::string, std::string> overrides;
};

/// key=value per line, '#' starts a comment, blank lines ignored. Keys are
/// the CliConfig fields (problem, n, algo, suite, starts, seed, threads, out)
/// or SolverConfig keys. Throws ParseError naming the line.
CliConfig load_config(const std::string &path);

/// Same, from text already in memory.
CliConfig parse_config(const std::string &text, CliConfig base = {});

/// Suggestion for an unrecognized --algo value.
std::string suggest_algorithm(const std::string &word);

/// Exit codes: 0 success, 1 a run failed or output could not be written,
/// 2 usage error.
int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace npqn
