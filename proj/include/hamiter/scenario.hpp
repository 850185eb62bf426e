#pragma once

// Scenario files and the task runner behind `hamiter run`.
//
// Format: one `key = value` per line, `#` starts a comment, the first key must
// be `schema = hamiter-scenario/1`.  Unknown or repeated keys are errors.
//
//   schema     = hamiter-scenario/1
//   name       = quartic-max-persistence
//   germ       = quartic-max            # corpus name
//   params     = a=0.5, lambda=2        # overrides of corpus defaults
//   box        = 2                      # domain radius (0: corpus default)
//   point      = 0 0                    # fixed point under study (default 0)
//   tasks      = persistence, sdm       # spectrum persistence sdm isolation gaps morse
//   k          = 1..6                   # or a list 1, 2, 5
//   radii      = 0.1, 0.01, 0.001       # isolation balls
//   delta_tol  = 1e-6
//   newton_tol = 1e-10
//   c1_gate    = 0.2
//   grid       = 9                      # seeds per axis for the gaps search
//   gf_radius  = 0.1                    # initial generating-function box
//   morse_radius = 0.1
//   seed       = 0

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hamiter/corpus.hpp"
#include "hamiter/serialize.hpp"

namespace hamiter {

struct Scenario {
  std::string name = "scenario";
  std::string germ;
  Params params;
  double box = 0.0;
  std::optional<Vec> point;
  std::vector<std::string> tasks;
  std::vector<int> ks{1};
  std::vector<double> radii{0.1, 0.01, 0.001};
  double delta_tol = 1e-6;
  double newton_tol = 1e-10;
  double c1_gate = 0.2;
  int grid = 9;
  double gf_radius = 0.1;
  double morse_radius = 0.1;
  std::uint64_t seed = 0;
};

/// Throws ParseError (message starts with "line N") and UnknownFormula.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

struct TaskResult {
  std::string task;
  bool ok = true;  // no module error
  std::string error;
  std::vector<Check> checks;
  std::vector<std::string> outputs;
};

struct RunResult {
  std::vector<TaskResult> tasks;
  Json summary;
  bool pass = false;
};

/// Runs every task, writes `<task>.json` / `.csv` artifacts and `summary.json`
/// into `out_dir`.  Module errors are recorded per task, never rethrown.
RunResult run_scenario(const Scenario& sc, const std::filesystem::path& out_dir);

}  // namespace hamiter
