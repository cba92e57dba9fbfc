#pragma once

#include <string>
#include <vector>

#include "dualgain/scenario.hpp"

namespace dualgain {

// One line of `compare` output: a measured quantity against its reference
// and tolerance; sigma_distance is filled for Monte-Carlo comparisons.
struct CheckResult {
  std::string check;
  std::string detail;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  double sigma_distance = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
  std::string note;
};

// Executes every check in the scenario. Numerical failures propagate as
// exceptions; comparison failures come back as pass = false rows.
std::vector<CheckResult> run_checks(const Scenario& sc);

// CSV emitters shared by the CLI subcommands and the acceptance harness.
// Every emitter starts with reproducibility comment lines (# version,
// # scenario_hash, # seed, # threads).
std::string csv_header(const Scenario& sc);
std::string compare_csv(const Scenario& sc, const std::vector<CheckResult>& results);
std::string simulate_csv(const Scenario& sc, int threads_override = -1);
std::string ruin_lt_csv(const Scenario& sc);
std::string ruin_prob_csv(const Scenario& sc);
std::string ruin_time_csv(const Scenario& sc);
std::string exit_csv(const Scenario& sc);
std::string dividends_csv(const Scenario& sc);
std::string brownian_csv(const Scenario& sc);

}  // namespace dualgain
