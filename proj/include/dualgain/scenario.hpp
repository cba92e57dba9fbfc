#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualgain/brownian.hpp"
#include "dualgain/inversion.hpp"
#include "dualgain/lattice.hpp"
#include "dualgain/mc.hpp"
#include "dualgain/params.hpp"
#include "dualgain/transforms.hpp"

namespace dualgain {

// Parse error carrying the offending key path; the CLI maps it to exit 2.
struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutputSpec {
  std::vector<double> x_values;
  std::vector<Complex> s_values;
  double alpha = 0.0;
  std::vector<std::string> quantities;
};

// One validation check run by `compare`; `params` keeps the check-specific
// knobs as parsed JSON (each check type documents its keys).
struct CheckSpec {
  std::string type;
  std::string name;
  std::shared_ptr<const nlohmann::json> params;
};

struct Scenario {
  int schema = 1;
  std::optional<DualModelParams> model;
  std::optional<LatticeParams> lattice;
  std::optional<BrownianParams> brownian;

  SeriesControl series;
  InversionControl inversion;
  LatticeNumerics lattice_numerics;
  BrownianNumerics brownian_numerics;

  MCConfig mc;
  OutputSpec outputs;
  std::vector<CheckSpec> checks;

  // FNV-1a of the scenario file bytes, for the reproducibility header.
  std::string source_hash;
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);

}  // namespace dualgain
