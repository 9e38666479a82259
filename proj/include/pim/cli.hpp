#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace pim {

// One pipeline stage. File formats and report records are owned by the
// individual modules; the driver only sequences them.
struct RunConfig {
  std::string command;  // tower|nice|scheme|check|lift|kac|thermo|report
  std::string map_file;
  std::string scheme_file;
  std::string measure_file;
  std::string nice;       // base candidate "lo..hi"
  std::string extended;   // extended base "lo..hi"
  std::string potential = "neglogdf:1";  // const:<p/q> | id | neglogdf:<t>
  unsigned depth = 5;     // tower depth; also the search depth of the M check
  unsigned tau_max = 8;
  unsigned horizon = 64;
  unsigned test_depth = 6;
  unsigned n_max = 4;     // cylinder / variation depth
  std::string epsilon = "1/10";
  double pl_bound = 0.0;
  std::size_t budget = 0;  // 0 = module defaults
  std::size_t sample_budget = 256;
  std::string out_file;    // empty = standard output
};

// Executes one stage. Record stream goes to `out` (or the config's out_file),
// diagnostics to `err`. Exit codes: 0 pass/pass-at-depth, 1 fail,
// 2 inconclusive or budget exceeded, 3 usage/parse error.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Runs all stages in order with stage headers; exit code is the maximum of
// the stage codes.
int run_bundle(const std::vector<RunConfig>& configs, std::ostream& out, std::ostream& err);

// Command-line entry: parses argv into a RunConfig and dispatches.
int main_entry(int argc, char** argv);

}  // namespace pim
