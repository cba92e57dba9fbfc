#include "dualgain/scenario.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace dualgain {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioError("scenario: " + where + ": " + what);
}

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) fail(where, "unknown key '" + it.key() + "'");
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

double num_or(const json& j, const char* key, double dflt) {
  return j.contains(key) ? num(j.at(key), key) : dflt;
}

int int_or(const json& j, const char* key, int dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number_integer()) fail(key, "expected an integer");
  return j.at(key).get<int>();
}

InterarrivalSpec parse_interarrival(const json& j) {
  require_keys(j, "interarrival", {"kind", "rate", "shape", "value", "weights", "rates"});
  const std::string kind = j.value("kind", "");
  if (kind == "exponential") return InterarrivalSpec::exponential(num(j.at("rate"), "rate"));
  if (kind == "erlang")
    return InterarrivalSpec::erlang(int_or(j, "shape", -1), num(j.at("rate"), "rate"));
  if (kind == "deterministic")
    return InterarrivalSpec::deterministic(num(j.at("value"), "value"));
  if (kind == "hyper_exponential") {
    std::vector<double> w, r;
    for (const auto& v : j.at("weights")) w.push_back(num(v, "weights"));
    for (const auto& v : j.at("rates")) r.push_back(num(v, "rates"));
    return InterarrivalSpec::hyper_exponential(std::move(w), std::move(r));
  }
  fail("interarrival.kind", "must be one of exponential|erlang|deterministic|hyper_exponential");
}

DualModelParams parse_model(const json& j) {
  require_keys(j, "model", {"a", "mu", "interarrival", "mixture_p", "delta"});
  DualModelParams p;
  p.a = num_or(j, "a", 0.0);
  if (j.contains("mu") && !j.at("mu").is_null()) p.mu = num(j.at("mu"), "mu");
  if (j.contains("interarrival")) p.interarrival = parse_interarrival(j.at("interarrival"));
  p.mixture_p = num_or(j, "mixture_p", 1.0);
  if (j.contains("delta") && !j.at("delta").is_null()) p.delta = num(j.at("delta"), "delta");
  p.validate();
  return p;
}

LatticeParams parse_lattice(const json& j) {
  require_keys(j, "lattice", {"b", "N", "lambda", "q", "a"});
  LatticeParams p;
  p.b = num_or(j, "b", 1.0);
  p.N = int_or(j, "N", 2);
  p.lambda = num_or(j, "lambda", 1.0);
  p.q = num_or(j, "q", 0.0);
  p.a = num_or(j, "a", 0.5);
  p.validate();
  return p;
}

BrownianParams parse_brownian(const json& j) {
  require_keys(j, "brownian", {"eta", "sigma", "lambda", "q", "b", "N", "a"});
  BrownianParams p;
  p.eta = num_or(j, "eta", -1.0);
  p.sigma = num_or(j, "sigma", 1.0);
  p.lambda = num_or(j, "lambda", 1.0);
  p.q = num_or(j, "q", 0.0);
  p.lattice.b = num_or(j, "b", 1.0);
  p.lattice.N = int_or(j, "N", 2);
  p.lattice.a = num_or(j, "a", 0.5);
  p.lattice.lambda = p.lambda;
  p.lattice.q = p.q;
  p.validate();
  return p;
}

void parse_numerics(const json& j, Scenario& sc) {
  require_keys(j, "numerics", {"series", "inversion", "lattice", "brownian"});
  if (j.contains("series")) {
    const auto& s = j.at("series");
    require_keys(s, "numerics.series", {"tail_tolerance", "max_terms", "singularity_guard"});
    sc.series.tail_tolerance = num_or(s, "tail_tolerance", sc.series.tail_tolerance);
    sc.series.max_terms = int_or(s, "max_terms", sc.series.max_terms);
    sc.series.singularity_guard = num_or(s, "singularity_guard", 0.0);
    sc.series.validate();
  }
  if (j.contains("inversion")) {
    const auto& s = j.at("inversion");
    require_keys(s, "numerics.inversion",
                 {"method", "terms", "contour_shift", "precision_target"});
    if (s.contains("method")) {
      const std::string m = s.at("method").get<std::string>();
      if (m == "euler")
        sc.inversion.method = InversionControl::Method::EulerSummation;
      else if (m == "talbot")
        sc.inversion.method = InversionControl::Method::Talbot;
      else
        fail("numerics.inversion.method", "must be euler|talbot");
    }
    sc.inversion.terms = int_or(s, "terms", sc.inversion.terms);
    sc.inversion.contour_shift = num_or(s, "contour_shift", sc.inversion.contour_shift);
    sc.inversion.precision_target =
        num_or(s, "precision_target", sc.inversion.precision_target);
    sc.inversion.validate();
  }
  if (j.contains("lattice")) {
    const auto& s = j.at("lattice");
    require_keys(s, "numerics.lattice", {"n_switch", "grid_points"});
    sc.lattice_numerics.n_switch = int_or(s, "n_switch", sc.lattice_numerics.n_switch);
    sc.lattice_numerics.grid_points =
        int_or(s, "grid_points", sc.lattice_numerics.grid_points);
  }
  if (j.contains("brownian")) {
    const auto& s = j.at("brownian");
    require_keys(s, "numerics.brownian", {"grid_points", "quad_nodes"});
    sc.brownian_numerics.grid_points =
        int_or(s, "grid_points", sc.brownian_numerics.grid_points);
    sc.brownian_numerics.quad_nodes = int_or(s, "quad_nodes", sc.brownian_numerics.quad_nodes);
    sc.brownian_numerics.validate();
  }
}

void parse_mc(const json& j, MCConfig& mc) {
  require_keys(j, "mc",
               {"paths", "seed", "escape_multiplier", "time_cap", "euler_dt", "threads"});
  if (j.contains("paths")) mc.paths = j.at("paths").get<std::int64_t>();
  if (j.contains("seed")) mc.seed = j.at("seed").get<std::uint64_t>();
  mc.escape_multiplier = num_or(j, "escape_multiplier", mc.escape_multiplier);
  mc.time_cap = num_or(j, "time_cap", mc.time_cap);
  mc.euler_dt = num_or(j, "euler_dt", mc.euler_dt);
  mc.threads = int_or(j, "threads", mc.threads);
}

std::vector<double> parse_grid(const json& j, const std::string& where) {
  if (j.is_array()) {
    std::vector<double> out;
    for (const auto& v : j) out.push_back(num(v, where));
    return out;
  }
  require_keys(j, where, {"from", "to", "count"});
  const double lo = num(j.at("from"), where), hi = num(j.at("to"), where);
  const int n = int_or(j, "count", 2);
  if (n < 1) fail(where, "count must be >= 1");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return out;
}

void parse_outputs(const json& j, OutputSpec& out) {
  require_keys(j, "outputs", {"x_grid", "s_grid", "alpha", "quantities"});
  if (j.contains("x_grid")) out.x_values = parse_grid(j.at("x_grid"), "outputs.x_grid");
  if (j.contains("s_grid")) {
    for (double s : parse_grid(j.at("s_grid"), "outputs.s_grid"))
      out.s_values.emplace_back(s, 0.0);
  }
  out.alpha = num_or(j, "alpha", 0.0);
  if (j.contains("quantities"))
    for (const auto& q : j.at("quantities")) out.quantities.push_back(q.get<std::string>());
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("scenario: malformed JSON: ") + e.what());
  }
  require_keys(j, "scenario",
               {"schema", "model", "lattice", "brownian", "numerics", "mc", "outputs",
                "compare"});
  Scenario sc;
  if (!j.contains("schema") || !j.at("schema").is_number_integer() ||
      j.at("schema").get<int>() != 1)
    fail("schema", "this build reads schema version 1");
  try {
    if (j.contains("model")) sc.model = parse_model(j.at("model"));
    if (j.contains("lattice")) sc.lattice = parse_lattice(j.at("lattice"));
    if (j.contains("brownian")) sc.brownian = parse_brownian(j.at("brownian"));
    if (j.contains("numerics")) parse_numerics(j.at("numerics"), sc);
    if (j.contains("mc")) parse_mc(j.at("mc"), sc.mc);
    if (j.contains("outputs")) parse_outputs(j.at("outputs"), sc.outputs);
    if (j.contains("compare")) {
      const auto& c = j.at("compare");
      require_keys(c, "compare", {"checks"});
      for (const auto& chk : c.at("checks")) {
        if (!chk.is_object() || !chk.contains("type"))
          fail("compare.checks", "each check needs a 'type'");
        CheckSpec spec;
        spec.type = chk.at("type").get<std::string>();
        spec.name = chk.value("name", spec.type);
        spec.params = std::make_shared<const json>(chk);
        sc.checks.push_back(std::move(spec));
      }
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }

  // FNV-1a 64 over the raw text.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream hex;
  hex << std::hex << h;
  sc.source_hash = hex.str();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("scenario: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace dualgain
