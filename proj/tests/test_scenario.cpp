#include <doctest.h>

#include "dualgain/compare.hpp"
#include "dualgain/scenario.hpp"

using namespace dualgain;

TEST_CASE("scenario: minimal model parses with defaults") {
  const auto sc = parse_scenario(R"({
    "schema": 1,
    "model": {"a": 0.5, "mu": 1.0, "interarrival": {"kind": "exponential", "rate": 1.0}}
  })");
  REQUIRE(sc.model.has_value());
  CHECK(sc.model->a == 0.5);
  CHECK(sc.mc.paths == 1'000'000);
  CHECK(sc.series.tail_tolerance == 1e-12);
  CHECK(!sc.source_hash.empty());
}

TEST_CASE("scenario: unknown keys are rejected with the offending name") {
  CHECK_THROWS_WITH_AS(parse_scenario(R"({"schema": 1, "modell": {}})"),
                       doctest::Contains("modell"), ScenarioError);
  CHECK_THROWS_WITH_AS(
      parse_scenario(R"({"schema": 1, "model": {"a": 0.5, "spurious": 1}})"),
      doctest::Contains("spurious"), ScenarioError);
}

TEST_CASE("scenario: schema version and malformed JSON") {
  CHECK_THROWS_AS(parse_scenario(R"({"schema": 2})"), ScenarioError);
  CHECK_THROWS_AS(parse_scenario("{not json"), ScenarioError);
}

TEST_CASE("scenario: lattice requires a > 0") {
  CHECK_THROWS_WITH_AS(parse_scenario(R"({
    "schema": 1,
    "lattice": {"b": 2.0, "N": 4, "lambda": 1.0, "q": 0.0, "a": 0.0}
  })"),
                       doctest::Contains("lattice requires a > 0"), ScenarioError);
}

TEST_CASE("scenario: grid forms") {
  const auto sc = parse_scenario(R"({
    "schema": 1,
    "outputs": {"x_grid": {"from": 1.0, "to": 2.0, "count": 3}, "alpha": 0.5}
  })");
  REQUIRE(sc.outputs.x_values.size() == 3);
  CHECK(sc.outputs.x_values[1] == 1.5);
  const auto sc2 = parse_scenario(R"({
    "schema": 1, "outputs": {"x_grid": [0.25, 4.0]}
  })");
  CHECK(sc2.outputs.x_values == std::vector<double>{0.25, 4.0});
}

TEST_CASE("compare: unknown check type is a scenario error") {
  const auto sc = parse_scenario(R"({
    "schema": 1, "compare": {"checks": [{"type": "nope"}]}
  })");
  CHECK_THROWS_AS(run_checks(sc), ScenarioError);
}

TEST_CASE("compare: quick structural checks pass end to end") {
  const auto sc = parse_scenario(R"({
    "schema": 1,
    "model": {"a": 0.5, "mu": 1.0, "interarrival": {"kind": "exponential", "rate": 1.0}},
    "compare": {"checks": [
      {"type": "functional_equation", "tolerance": 1e-10},
      {"type": "removable_singularity", "tolerance": 1e-6},
      {"type": "tau_reduction", "tolerance": 1e-12},
      {"type": "scale_suite"}
    ]}
  })");
  const auto results = run_checks(sc);
  CHECK(results.size() >= 6);
  for (const auto& r : results) {
    INFO(r.check, " / ", r.detail, " value=", r.value, " tol=", r.tolerance);
    CHECK(r.pass);
  }
  const std::string csv = compare_csv(sc, results);
  CHECK(csv.find("# dualgain") != std::string::npos);
  CHECK(csv.find("scenario_hash=") != std::string::npos);
  CHECK(csv.find("FAIL") == std::string::npos);
}

TEST_CASE("simulate csv is identical across worker counts") {
  const auto sc = parse_scenario(R"({
    "schema": 1,
    "model": {"a": 0.5, "mu": 1.0, "interarrival": {"kind": "exponential", "rate": 1.0}},
    "mc": {"paths": 20000, "seed": 5},
    "outputs": {"x_grid": [1.0], "alpha": 0.3, "quantities": ["ruin"]}
  })");
  CHECK(simulate_csv(sc, 1) == simulate_csv(sc, 8));
}
