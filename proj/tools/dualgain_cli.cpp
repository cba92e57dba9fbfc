// Command-line front end: loads a JSON scenario and runs the analytic
// solvers, the Monte-Carlo estimators, or the cross-validation comparisons.
// Results go to stdout (or --out) as CSV with a reproducibility header;
// diagnostics go to stderr.
//
// Exit codes: 0 success, 2 scenario/schema error, 3 numerical failure,
// 4 comparison failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "dualgain/compare.hpp"

namespace {

int write_out(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write '" << out_path << "'\n";
    return 3;
  }
  out << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual risk model with proportional gains: transforms, lattice "
               "exit problems, barrier dividends, and Monte-Carlo validation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string scenario_path;
  std::string out_path;
  bool quiet = false;
  app.add_option("--out", out_path, "write CSV to this path instead of stdout");
  app.add_flag("--quiet", quiet, "suppress progress notes on stderr");

  struct Sub {
    const char* name;
    const char* help;
    std::string (*emit)(const dualgain::Scenario&);
  };
  const Sub subs[] = {
      {"ruin-lt", "Laplace transform of the ruin probability over the s grid",
       dualgain::ruin_lt_csv},
      {"ruin-prob", "ruin probability over the x grid (numerical inversion)",
       dualgain::ruin_prob_csv},
      {"ruin-time", "E[e^{-alpha tau_x}] over the x grid", dualgain::ruin_time_csv},
      {"exit", "lattice exit transforms rho_n, mu_n and evaluation curves",
       dualgain::exit_csv},
      {"dividends", "barrier dividend values v_n and the v_N(x) curve",
       dualgain::dividends_csv},
      {"brownian", "Brownian-perturbed lattice: rho_n, v_n and curves",
       dualgain::brownian_csv},
  };
  for (const auto& s : subs) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    cmd->add_option("scenario", scenario_path, "scenario JSON file")->required();
  }
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo estimates");
  simulate->add_option("scenario", scenario_path, "scenario JSON file")->required();
  auto* compare = app.add_subcommand(
      "compare", "run the scenario's validation checks (exit 4 on any miss)");
  compare->add_option("scenario", scenario_path, "scenario JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  dualgain::Scenario sc;
  try {
    sc = dualgain::load_scenario(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    for (const auto& s : subs) {
      if (app.got_subcommand(s.name)) return write_out(s.emit(sc), out_path);
    }
    if (simulate->parsed()) return write_out(dualgain::simulate_csv(sc), out_path);
    if (compare->parsed()) {
      const auto results = dualgain::run_checks(sc);
      const int rc = write_out(dualgain::compare_csv(sc, results), out_path);
      if (rc != 0) return rc;
      int failures = 0;
      for (const auto& r : results)
        if (!r.pass) {
          ++failures;
          if (!quiet)
            std::cerr << "FAIL " << r.check << " [" << r.detail << "]\n";
        }
      if (!quiet)
        std::cerr << results.size() << " checks, " << failures << " failures\n";
      return failures == 0 ? 0 : 4;
    }
  } catch (const dualgain::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
