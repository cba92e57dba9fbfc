#include "dualgain/compare.hpp"

#include <cmath>
#include <functional>
#include <json.hpp>
#include <sstream>

#include "dualgain/csv.hpp"

namespace dualgain {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "dualgain 1.0.0";

double jnum(const json& j, const char* key, double dflt) {
  return j.contains(key) ? j.at(key).get<double>() : dflt;
}

std::vector<double> jgrid(const json& j, const char* key,
                          std::vector<double> dflt) {
  if (!j.contains(key)) return dflt;
  std::vector<double> out;
  for (const auto& v : j.at(key)) out.push_back(v.get<double>());
  return out;
}

// Adaptive Simpson, local to the check engine (the tests keep their own).
double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
  const double m = 0.5 * (a + b);
  const double flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (!std::isfinite(left + right)) return left + right;
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  const int panels = 16;
  const double w = (b - a) / panels;
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + i * w, hi = lo + w;
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    total += simpson_rec(f, lo, hi, fa, fm, fb, w / 6.0 * (fa + 4.0 * fm + fb),
                         tol / panels, 36);
  }
  return total;
}

DualModelParams model_from(const Scenario& sc, const json& chk) {
  if (chk.contains("model")) {
    Scenario shim = parse_scenario(
        json{{"schema", 1}, {"model", chk.at("model")}}.dump());
    return *shim.model;
  }
  if (!sc.model) throw std::runtime_error("check requires a model section");
  return *sc.model;
}

std::vector<Complex> default_s_grid() {
  std::vector<Complex> s;
  for (int i = 0; i < 10; ++i) s.emplace_back(0.1 * std::pow(1.5, i), 0.0);
  for (int i = 0; i < 10; ++i)
    s.emplace_back(0.3 + 0.17 * i, (i % 2 ? -1.0 : 1.0) * (0.5 + 0.25 * i));
  return s;
}

void push(std::vector<CheckResult>& out, const std::string& check,
          const std::string& detail, double value, double reference,
          double tolerance, double sigma = std::numeric_limits<double>::quiet_NaN(),
          const std::string& note = "") {
  CheckResult r;
  r.check = check;
  r.detail = detail;
  r.value = value;
  r.reference = reference;
  r.tolerance = tolerance;
  r.sigma_distance = sigma;
  r.pass = std::abs(value - reference) <= tolerance;
  r.note = note;
  out.push_back(std::move(r));
}

// --- individual checks -----------------------------------------------------

void check_functional_equation(const Scenario& sc, const json& chk,
                               std::vector<CheckResult>& out) {
  const auto params = model_from(sc, chk);
  const double tol = jnum(chk, "tolerance", 1e-10);
  RuinTransform rt(params, sc.series);
  const double a = params.a;
  double worst = 0.0;
  for (const Complex& s : default_s_grid()) {
    const auto [H, J] = rt.hj(s);
    worst = std::max(worst,
                     std::abs(rt.ruin_lt(s) - J * rt.ruin_lt(s / (1.0 + a)) - H));
  }
  push(out, chk.value("name", "functional_equation"), "ruin", worst, 0.0, tol);

  const double alpha = jnum(chk, "alpha", 0.7);
  const double mu = *params.mu;
  double worst_tau = 0.0;
  for (const Complex& s : default_s_grid()) {
    const Complex phi = params.interarrival.lst(s + alpha);
    const Complex J1 = phi * mu / (mu * (1.0 + a) - s);
    const Complex H1 = (1.0 - phi) / (s + alpha) - J1 * rt.tau_at_mu(alpha);
    worst_tau = std::max(
        worst_tau, std::abs(rt.ruin_time_lt(s, alpha) -
                            J1 * rt.ruin_time_lt(s / (1.0 + a), alpha) - H1));
  }
  push(out, chk.value("name", "functional_equation"), "ruin_time", worst_tau, 0.0, tol);
}

void check_removable_singularity(const Scenario& sc, const json& chk,
                                 std::vector<CheckResult>& out) {
  const auto params = model_from(sc, chk);
  const double tol = jnum(chk, "tolerance", 1e-6);
  RuinTransform rt(params, sc.series);
  const double star = *params.mu * (1.0 + params.a);
  SeriesDiag diag;
  const Complex guarded = rt.ruin_lt(Complex(star, 0.0), &diag);
  const Complex lo = rt.ruin_lt(Complex(star * (1.0 - 1e-4), 0.0));
  const Complex hi = rt.ruin_lt(Complex(star * (1.0 + 1e-4), 0.0));
  push(out, chk.value("name", "removable_singularity"), "two_sided_average",
       std::abs(0.5 * (lo + hi) - guarded), 0.0, tol,
       std::numeric_limits<double>::quiet_NaN(), diag.guarded ? "guard engaged" : "");
}

void check_tau_reduction(const Scenario& sc, const json& chk,
                         std::vector<CheckResult>& out) {
  const auto params = model_from(sc, chk);
  const double tol = jnum(chk, "tolerance", 1e-12);
  RuinTransform rt(params, sc.series);
  double worst = 0.0;
  for (const Complex& s : default_s_grid())
    worst = std::max(worst, std::abs(rt.ruin_time_lt(s, 0.0) - rt.ruin_lt(s)));
  push(out, chk.value("name", "tau_reduction"), "alpha=0", worst, 0.0, tol);
}

void check_mixture(const Scenario& sc, const json& chk,
                   std::vector<CheckResult>& out) {
  const auto name = chk.value("name", std::string("mixture"));
  auto params = model_from(sc, chk);
  if (params.mixture_p >= 1.0)
    throw std::runtime_error("mixture check needs mixture_p < 1 in its model");
  RuinTransform rt(params, sc.series);

  // p = 1 reduction on the same base parameters.
  DualModelParams base = params;
  base.mixture_p = 1.0;
  base.delta.reset();
  RuinTransform rt_base(base, sc.series);
  double worst = 0.0;
  for (double s : {0.5, 1.0, 2.0})
    worst = std::max(worst, std::abs(rt_base.generalized_ruin_lt(Complex(s, 0)) -
                                     rt_base.ruin_lt(Complex(s, 0))));
  push(out, name, "p=1_reduction", worst, 0.0, jnum(chk, "tolerance_reduction", 1e-10));

  const double s1 = rt.rouche_s1();
  const double delta = *params.delta, p = params.mixture_p;
  const double resid =
      std::abs(delta - s1 - (1.0 - p) * delta * params.interarrival.lst_real(s1));
  push(out, name, "rouche_residual", resid, 0.0, jnum(chk, "tolerance_root", 1e-10));

  const double mu = *params.mu, a = params.a;
  const double phi1 = params.interarrival.lst_real(s1);
  const double rho_s1a = rt.generalized_ruin_lt(Complex(s1 / (1.0 + a), 0)).real();
  const double bracket =
      (1.0 - phi1) / s1 +
      p * phi1 * mu / (mu * (1.0 + a) - s1) * (rho_s1a - rt.rho_at_mu()) -
      (1.0 - p) * delta / (delta - s1) * phi1 * rt.rho_at_delta();
  push(out, name, "analyticity_at_s1", std::abs(bracket), 0.0,
       jnum(chk, "tolerance_analyticity", 1e-9));
}

void check_ruin_prob_vs_mc(const Scenario& sc, const json& chk,
                           std::vector<CheckResult>& out) {
  const auto params = model_from(sc, chk);
  const double sigmas = jnum(chk, "sigmas", 3.0);
  RuinTransform rt(params, sc.series);
  for (double x : jgrid(chk, "x_values", {0.5, 1.0, 2.0})) {
    const auto analytic = ruin_probability(x, rt, sc.inversion, true);
    const auto est = simulate_ruin(params, x, 0.0, sc.mc);
    const double tol = sigmas * est.stderr_ + est.censor_bound();
    const double sd = est.stderr_ > 0 ? std::abs(analytic.value - est.mean) / est.stderr_
                                      : 0.0;
    push(out, chk.value("name", "ruin_prob_vs_mc"), "x=" + format_double(x),
         analytic.value, est.mean, tol, sd,
         analytic.method_warning ? "inversion methods disagree" : "");
  }
}

void check_classical_a0(const Scenario& sc, const json& chk,
                        std::vector<CheckResult>& out) {
  const auto name = chk.value("name", std::string("classical_a0"));
  // Certain-ruin parameterization: R == 1 after inversion.
  DualModelParams certain;
  certain.a = 0.0;
  certain.mu = 2.0;
  certain.interarrival = InterarrivalSpec::exponential(1.0);
  RuinTransform rtc(certain, sc.series);
  for (double x : jgrid(chk, "x_values", {0.5, 1.0, 2.0}))
    push(out, name, "certain_x=" + format_double(x),
         ruin_probability(x, rtc, sc.inversion).value, 1.0,
         jnum(chk, "tolerance_certain", 1e-3));

  // Transient parameterization: R(x) = e^{-zeta x} with zeta solved from
  // zeta - lambda + lambda mu/(mu + zeta) = 0 by bisection.
  const double lambda = 2.0, mu = 1.0;
  DualModelParams trans;
  trans.a = 0.0;
  trans.mu = mu;
  trans.interarrival = InterarrivalSpec::exponential(lambda);
  auto g = [&](double z) { return z - lambda + lambda * mu / (mu + z); };
  double lo = 1e-12, hi = lambda;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  const double zeta = 0.5 * (lo + hi);
  RuinTransform rtt(trans, sc.series);
  for (double x : jgrid(chk, "x_values", {0.5, 1.0, 2.0}))
    push(out, name, "transient_x=" + format_double(x),
         ruin_probability(x, rtt, sc.inversion).value, std::exp(-zeta * x),
         jnum(chk, "tolerance_transient", 1e-4));
}

void check_lattice_complementarity(const Scenario& sc, const json& chk,
                                   std::vector<CheckResult>& out) {
  LatticeParams lp = sc.lattice ? *sc.lattice : LatticeParams{};
  lp.q = 0.0;
  lp.N = static_cast<int>(jnum(chk, "N", 16));
  auto sol = solve_exit(lp, sc.lattice_numerics);
  double worst = 0.0;
  for (int n = 1; n <= lp.N - 1; ++n)
    worst = std::max(worst, std::abs(sol.rho[n] + sol.mu[n] - 1.0));
  push(out, chk.value("name", "lattice_complementarity"), "max_n", worst, 0.0,
       jnum(chk, "tolerance", 1e-8));
}

void check_lattice_vs_mc(const Scenario& sc, const json& chk,
                         std::vector<CheckResult>& out) {
  if (!sc.lattice) throw std::runtime_error("lattice_vs_mc needs a lattice section");
  const auto name = chk.value("name", std::string("lattice_vs_mc"));
  const double sigmas = jnum(chk, "sigmas", 3.0);
  auto sol = solve_exit(*sc.lattice, sc.lattice_numerics);
  solve_dividends(sol, sc.lattice_numerics);
  for (double nd : jgrid(chk, "rho_indices", {3})) {
    const int n = static_cast<int>(nd);
    const auto est = simulate_lattice(*sc.lattice, sc.lattice->level(n), sc.mc);
    push(out, name, "rho_" + std::to_string(n), sol.rho[n], est.rho.mean,
         sigmas * est.rho.stderr_ + est.rho.censor_bound(),
         est.rho.stderr_ > 0 ? std::abs(sol.rho[n] - est.rho.mean) / est.rho.stderr_ : 0.0);
  }
  for (double nd : jgrid(chk, "mu_indices", {2})) {
    const int n = static_cast<int>(nd);
    const auto est = simulate_lattice(*sc.lattice, sc.lattice->level(n), sc.mc);
    push(out, name, "mu_" + std::to_string(n), sol.mu[n], est.mu.mean,
         sigmas * est.mu.stderr_ + est.mu.censor_bound(),
         est.mu.stderr_ > 0 ? std::abs(sol.mu[n] - est.mu.mean) / est.mu.stderr_ : 0.0);
  }
  for (double x : jgrid(chk, "x_values", {})) {
    const auto est = simulate_lattice(*sc.lattice, x, sc.mc);
    const double v = rho_eval(x, sol, sc.lattice_numerics);
    push(out, name, "rho_eval_x=" + format_double(x), v, est.rho.mean,
         sigmas * est.rho.stderr_ + est.rho.censor_bound(),
         est.rho.stderr_ > 0 ? std::abs(v - est.rho.mean) / est.rho.stderr_ : 0.0);
  }
}

void check_dividends(const Scenario& sc, const json& chk,
                     std::vector<CheckResult>& out) {
  if (!sc.lattice) throw std::runtime_error("dividends check needs a lattice section");
  const auto name = chk.value("name", std::string("dividends"));
  LatticeParams lp = *sc.lattice;
  auto sol = solve_exit(lp, sc.lattice_numerics);
  solve_dividends(sol, sc.lattice_numerics);

  push(out, name, "v_N_boundary", sol.v[lp.N], 0.0, 0.0);

  // Residuals of the defining rows, recomputed from the same basis.
  ExpConvolutionBasis basis(lp.lambda, lp.q, lp.a, sc.lattice_numerics);
  double worst = 0.0;
  for (int n = 0; n <= lp.N - 1; ++n) {
    const double arg = lp.gap(n + 1);
    auto [omega, qc] = basis.unit_and_linear_conv(n + 1, arg);
    double rhs = omega * sol.v[0] + std::pow(1.0 + lp.a, n + 1) * qc;
    for (int j = 0; j <= n; ++j) rhs += basis.gamma(j, arg) * sol.v[n + 1 - j];
    worst = std::max(worst, std::abs(sol.v[n] - rhs));
  }
  push(out, name, "defining_residual", worst, 0.0, jnum(chk, "tolerance_residual", 1e-10));

  const double sigmas = jnum(chk, "sigmas", 3.0);
  {
    const auto est = simulate_lattice(lp, lp.b, sc.mc);
    push(out, name, "v_0", sol.v[0], est.v.mean,
         sigmas * est.v.stderr_ + est.v.censor_bound() * sol.v[0],
         est.v.stderr_ > 0 ? std::abs(sol.v[0] - est.v.mean) / est.v.stderr_ : 0.0);
  }
  for (double x : jgrid(chk, "x_values", {})) {
    const auto est = simulate_lattice(lp, x, sc.mc);
    const double v = v_eval(x, sol, sc.lattice_numerics);
    push(out, name, "v_eval_x=" + format_double(x), v, est.v.mean,
         sigmas * est.v.stderr_ + est.v.censor_bound() * std::max(1.0, sol.v[0]),
         est.v.stderr_ > 0 ? std::abs(v - est.v.mean) / est.v.stderr_ : 0.0);
  }

  // Horizon monotonicity and geometric convergence at a fixed x.
  const double x = jnum(chk, "x_monotone", 0.65 * lp.b);
  std::vector<double> horizon;
  double prev = -1.0;
  bool monotone = true;
  for (int N : {4, 8, 16, 32}) {
    LatticeParams pn = lp;
    pn.N = N;
    auto s = solve_exit(pn, sc.lattice_numerics);
    solve_dividends(s, sc.lattice_numerics);
    const double v = v_eval(x, s, sc.lattice_numerics);
    if (v < prev - 1e-12) monotone = false;
    horizon.push_back(v);
    prev = v;
  }
  CheckResult mono;
  mono.check = name;
  mono.detail = "horizon_monotone_N=4..32";
  mono.value = monotone ? 1.0 : 0.0;
  mono.reference = 1.0;
  mono.tolerance = 0.0;
  mono.pass = monotone;
  out.push_back(mono);
  const double increment = std::abs(horizon[3] - horizon[2]);
  push(out, name, "final_increment_fraction", increment / std::max(horizon[3], 1e-300),
       0.0, jnum(chk, "final_increment_frac", 0.01));
}

void check_delay_ode(const Scenario& sc, const json& chk,
                     std::vector<CheckResult>& out) {
  if (!sc.lattice) throw std::runtime_error("delay_ode check needs a lattice section");
  const auto name = chk.value("name", std::string("delay_ode"));
  LatticeParams lp = *sc.lattice;
  const int n_ref = static_cast<int>(jnum(chk, "reference_N", 64));

  LatticeParams pref = lp;
  pref.N = n_ref;
  auto ref = solve_exit(pref, sc.lattice_numerics);
  solve_dividends(ref, sc.lattice_numerics);
  const double v0_ref = ref.v[0];
  const double lq = lp.lambda + lp.q;

  // Sample off-lattice points: levels are shared by every N, so geometric
  // midpoints avoid the derivative kinks for all solves at once.
  auto midpoints = [&](int from, int to) {
    std::vector<double> xs;
    for (int n = from; n <= to; ++n)
      xs.push_back(std::sqrt(lp.level(n) * lp.level(n - 1)));
    return xs;
  };
  const auto upper_xs = midpoints(1, 1);              // (b/(1+a), b)
  const auto inner_xs = midpoints(2, 7);              // inside (L_8, b/(1+a))

  std::vector<double> res_upper, res_inner;
  for (int N : {8, 16, 32}) {
    LatticeParams pn = lp;
    pn.N = N;
    auto s = solve_exit(pn, sc.lattice_numerics);
    solve_dividends(s, sc.lattice_numerics);
    auto v = [&](double x) { return v_eval(x, s, sc.lattice_numerics); };
    double worst_u = 0.0, worst_i = 0.0;
    for (double x : upper_xs) {
      const double h = 1e-5 * lp.b;
      const double vp = (v(x + h) - v(x - h)) / (2.0 * h);
      worst_u = std::max(
          worst_u, std::abs(vp + lq * v(x) -
                            lp.lambda * (x * (1.0 + lp.a) - lp.b + v0_ref)));
    }
    for (double x : inner_xs) {
      const double h = 1e-4 * x * lp.a;
      const double vp = (v(x + h) - v(x - h)) / (2.0 * h);
      const double cont = v_eval(x * (1.0 + lp.a), ref, sc.lattice_numerics);
      worst_i = std::max(worst_i, std::abs(vp + lq * v(x) - lp.lambda * cont));
    }
    res_upper.push_back(worst_u);
    res_inner.push_back(worst_i);
  }
  auto monotone_down = [](const std::vector<double>& r) {
    return r[0] > r[1] && r[1] > r[2];
  };
  CheckResult up;
  up.check = name;
  up.detail = "upper_region_residual_N=8,16,32";
  up.value = res_upper[2];
  up.reference = 0.0;
  up.tolerance = res_upper[1];
  up.pass = monotone_down(res_upper);
  up.note = format_double(res_upper[0]) + " > " + format_double(res_upper[1]) + " > " +
            format_double(res_upper[2]);
  out.push_back(up);
  CheckResult in;
  in.check = name;
  in.detail = "interior_region_residual_N=8,16,32";
  in.value = res_inner[2];
  in.reference = 0.0;
  in.tolerance = res_inner[1];
  in.pass = monotone_down(res_inner);
  in.note = format_double(res_inner[0]) + " > " + format_double(res_inner[1]) + " > " +
            format_double(res_inner[2]);
  out.push_back(in);
}

void check_scale_suite(const Scenario& sc, const json& chk,
                       std::vector<CheckResult>& out) {
  const auto name = chk.value("name", std::string("scale_suite"));
  const double eta = jnum(chk, "eta", sc.brownian ? sc.brownian->eta : -1.0);
  const double sigma = jnum(chk, "sigma", sc.brownian ? sc.brownian->sigma : 0.3);
  const double q_eff = jnum(chk, "q_eff", sc.brownian
                                              ? sc.brownian->q + sc.brownian->lambda
                                              : 1.1);
  ScaleFamily f(eta, sigma, q_eff);
  push(out, name, "W(0)", f.w(0.0), 0.0, 0.0);
  push(out, name, "Z(0)", f.z(0.0), 1.0, 0.0);

  const double theta = f.phi_inverse() + 1.0;
  const double X = std::min(40.0, 0.97 * 709.0 / f.phi_inverse());
  const double lt = integrate(
      [&](double x) { return std::exp(-theta * x) * f.w(x); }, 0.0, X, 1e-10);
  push(out, name, "W_transform_identity", lt, 1.0 / (f.psi(theta) - q_eff),
       jnum(chk, "tolerance_lt", 1e-6));

  // Central differences, measured relative to the (exponentially growing)
  // target so the tolerance is meaningful across the domain.
  double worst_z = 0.0, worst_wbar = 0.0;
  for (double x : {0.1, 0.35, 0.8}) {
    const double h = 1e-6;
    const double scale = std::max(1.0, f.w(x));
    worst_z = std::max(worst_z, std::abs((f.z(x + h) - f.z(x - h)) / (2 * h) -
                                         q_eff * f.w(x)) /
                                    (q_eff * scale));
    worst_wbar = std::max(
        worst_wbar,
        std::abs((f.wbar(x + h) - f.wbar(x - h)) / (2 * h) - f.w(x)) / scale);
  }
  push(out, name, "Zprime_equals_qeff_W", worst_z, 0.0, jnum(chk, "tolerance_deriv", 1e-6),
       std::numeric_limits<double>::quiet_NaN(),
       "standard sign convention Z = 1 + q_eff int W (see ledger)");
  push(out, name, "Wbar_prime_equals_W", worst_wbar, 0.0,
       jnum(chk, "tolerance_deriv", 1e-6));
}

void check_prop_base_cases(const Scenario& sc, const json& chk,
                           std::vector<CheckResult>& out) {
  if (!sc.brownian) throw std::runtime_error("prop_base_cases needs a brownian section");
  const auto name = chk.value("name", std::string("prop_base_cases"));
  const double tol = jnum(chk, "tolerance", 1e-6);
  const BrownianParams& bp = *sc.brownian;
  BrownianFamilies fam(bp, sc.brownian_numerics, true);
  const ScaleFamily& f = fam.scale();
  auto L = [&](int n) { return bp.lattice.level(n); };
  const double one_plus_a = 1.0 + bp.lattice.a;

  // Direct nested quadrature of the resolvent composition.
  std::function<double(int, int, double, double)> r_quad =
      [&](int n, int k, double x, double tol_q) -> double {
    if (k == 0) return f.exit_down(x - L(n), L(n - 1) - L(n));
    return bp.lambda * integrate(
                           [&](double y) {
                             return f.resolvent(x, y, L(n), L(n - 1)) *
                                    r_quad(n - 1, k - 1, one_plus_a * y, tol_q * 10);
                           },
                           L(n), L(n - 1), tol_q);
  };
  std::function<double(int, int, double, double)> w_quad =
      [&](int n, int k, double x, double tol_q) -> double {
    if (k == 1) return f.exit_up(x - L(n), L(n - 1) - L(n));
    return bp.lambda * integrate(
                           [&](double y) {
                             return f.resolvent(x, y, L(n), L(n - 1)) *
                                    w_quad(n - 1, k - 1, one_plus_a * y, tol_q * 10);
                           },
                           L(n), L(n - 1), tol_q);
  };
  std::function<double(int, double, double)> t_quad =
      [&](int n, double x, double tol_q) -> double {
    return bp.lambda * integrate(
                           [&](double y) {
                             const double z = one_plus_a * y;
                             return f.resolvent(x, y, L(n), L(n - 1)) *
                                    (n == 1 ? 1.0 : t_quad(n - 1, z, tol_q * 10));
                           },
                           L(n), L(n - 1), tol_q);
  };
  std::function<double(int, double, double)> vj_quad =
      [&](int n, double x, double tol_q) -> double {
    return bp.lambda * integrate(
                           [&](double y) {
                             const double z = one_plus_a * y;
                             return f.resolvent(x, y, L(n), L(n - 1)) *
                                    (n == 1 ? z - L(0) : vj_quad(n - 1, z, tol_q * 10));
                           },
                           L(n), L(n - 1), tol_q);
  };

  const double x2 = std::sqrt(L(2) * L(1));
  const double x3 = std::sqrt(L(3) * L(2));
  push(out, name, "r_k1", fam.r(2, 1, x2), r_quad(2, 1, x2, 1e-9), tol);
  push(out, name, "r_k2", fam.r(3, 2, x3), r_quad(3, 2, x3, 1e-9), tol);
  push(out, name, "omega_k2", fam.omega(3, 2, x3), w_quad(3, 2, x3, 1e-9), tol);
  push(out, name, "T_1", fam.t_up(1, std::sqrt(L(1) * L(0))),
       t_quad(1, std::sqrt(L(1) * L(0)), 1e-9), tol);
  push(out, name, "T_2", fam.t_up(2, x2), t_quad(2, x2, 1e-9), tol);
  push(out, name, "vJ_1", fam.v_jump(1, std::sqrt(L(1) * L(0))),
       vj_quad(1, std::sqrt(L(1) * L(0)), 1e-9), tol);
  push(out, name, "vJ_2", fam.v_jump(2, x2), vj_quad(2, x2, 1e-9), tol);
}

void check_brownian_vs_mc(const Scenario& sc, const json& chk,
                          std::vector<CheckResult>& out) {
  if (!sc.brownian) throw std::runtime_error("brownian_vs_mc needs a brownian section");
  const auto name = chk.value("name", std::string("brownian_vs_mc"));
  const double sigmas = jnum(chk, "sigmas", 3.0);
  const double allowance = jnum(chk, "allowance_frac", 0.01);
  const BrownianParams& bp = *sc.brownian;
  auto sol = solve_brownian(bp, sc.brownian_numerics, true);
  auto L = [&](int n) { return bp.lattice.level(n); };

  const int nr = static_cast<int>(jnum(chk, "rho_index", 2));
  {
    const auto est = simulate_brownian_lattice(bp, L(nr), sc.mc);
    push(out, name, "rho_" + std::to_string(nr), sol.rho[nr], est.rho.mean,
         sigmas * est.rho.stderr_ + allowance * std::max(sol.rho[nr], 0.1),
         est.rho.stderr_ > 0 ? std::abs(sol.rho[nr] - est.rho.mean) / est.rho.stderr_
                             : 0.0);
  }
  {
    const auto est = simulate_brownian_lattice(bp, bp.lattice.b, sc.mc);
    push(out, name, "v_0", sol.v[0], est.v.mean,
         sigmas * est.v.stderr_ + allowance * std::max(sol.v[0], 0.1),
         est.v.stderr_ > 0 ? std::abs(sol.v[0] - est.v.mean) / est.v.stderr_ : 0.0);
  }
  const double xi = jnum(chk, "x_interior", std::sqrt(L(2) * L(1)));
  {
    const auto est = simulate_brownian_lattice(bp, xi, sc.mc);
    const double rv = rho_eval_brownian(xi, sol);
    push(out, name, "rho_eval_x=" + format_double(xi), rv, est.rho.mean,
         sigmas * est.rho.stderr_ + allowance * std::max(rv, 0.1),
         est.rho.stderr_ > 0 ? std::abs(rv - est.rho.mean) / est.rho.stderr_ : 0.0);
    const double vv = v_eval_brownian(xi, sol);
    push(out, name, "v_eval_x=" + format_double(xi), vv, est.v.mean,
         sigmas * est.v.stderr_ + allowance * std::max(sol.v[0], 0.1),
         est.v.stderr_ > 0 ? std::abs(vv - est.v.mean) / est.v.stderr_ : 0.0);
  }
  push(out, name, "quadrature_drift", sol.quad_drift_rho + sol.quad_drift_v, 0.0, 1e-7);
}

void check_brownian_degenerate(const Scenario& sc, const json& chk,
                               std::vector<CheckResult>& out) {
  if (!sc.brownian) throw std::runtime_error("brownian_degenerate needs a brownian section");
  const auto name = chk.value("name", std::string("brownian_degenerate"));
  const double tol_frac = jnum(chk, "tolerance_frac", 0.02);
  auto sol = solve_brownian(*sc.brownian, sc.brownian_numerics, false);
  auto lat = solve_exit(sc.brownian->lattice, sc.lattice_numerics);
  double worst = 0.0;
  for (int n = 1; n <= sc.brownian->lattice.N - 1; ++n)
    worst = std::max(worst, std::abs(sol.rho[n] - lat.rho[n]) /
                                std::max(std::abs(lat.rho[n]), 1e-6));
  push(out, name, "max_relative_rho_gap", worst, 0.0, tol_frac);
}

void check_reproducibility(const Scenario& sc, const json& chk,
                           std::vector<CheckResult>& out) {
  const auto name = chk.value("name", std::string("reproducibility"));
  const int t1 = static_cast<int>(jnum(chk, "threads_a", 1));
  const int t2 = static_cast<int>(jnum(chk, "threads_b", 8));
  const std::string a = simulate_csv(sc, t1);
  const std::string b = simulate_csv(sc, t2);
  CheckResult r;
  r.check = name;
  r.detail = "bitwise_csv_threads_" + std::to_string(t1) + "_vs_" + std::to_string(t2);
  r.pass = a == b;
  r.value = r.pass ? 0.0 : 1.0;
  r.reference = 0.0;
  r.tolerance = 0.0;
  out.push_back(r);
}

}  // namespace

std::vector<CheckResult> run_checks(const Scenario& sc) {
  std::vector<CheckResult> out;
  for (const auto& spec : sc.checks) {
    const json& chk = *spec.params;
    if (spec.type == "functional_equation")
      check_functional_equation(sc, chk, out);
    else if (spec.type == "removable_singularity")
      check_removable_singularity(sc, chk, out);
    else if (spec.type == "tau_reduction")
      check_tau_reduction(sc, chk, out);
    else if (spec.type == "mixture")
      check_mixture(sc, chk, out);
    else if (spec.type == "ruin_prob_vs_mc")
      check_ruin_prob_vs_mc(sc, chk, out);
    else if (spec.type == "classical_a0")
      check_classical_a0(sc, chk, out);
    else if (spec.type == "lattice_complementarity")
      check_lattice_complementarity(sc, chk, out);
    else if (spec.type == "lattice_vs_mc")
      check_lattice_vs_mc(sc, chk, out);
    else if (spec.type == "dividends")
      check_dividends(sc, chk, out);
    else if (spec.type == "delay_ode")
      check_delay_ode(sc, chk, out);
    else if (spec.type == "scale_suite")
      check_scale_suite(sc, chk, out);
    else if (spec.type == "prop_base_cases")
      check_prop_base_cases(sc, chk, out);
    else if (spec.type == "brownian_vs_mc")
      check_brownian_vs_mc(sc, chk, out);
    else if (spec.type == "brownian_degenerate")
      check_brownian_degenerate(sc, chk, out);
    else if (spec.type == "reproducibility")
      check_reproducibility(sc, chk, out);
    else
      throw ScenarioError("compare: unknown check type '" + spec.type + "'");
  }
  return out;
}

// --- CSV emitters ------------------------------------------------------------

std::string csv_header(const Scenario& sc) {
  std::ostringstream os;
  os << "# " << kVersion << "\n";
  os << "# scenario_hash=" << sc.source_hash << "\n";
  os << "# seed=" << sc.mc.seed << "\n";
  return os.str();
}

std::string compare_csv(const Scenario& sc, const std::vector<CheckResult>& results) {
  std::ostringstream os;
  os << csv_header(sc);
  os << "check,detail,value,reference,tolerance,sigma_distance,status,note\n";
  for (const auto& r : results) {
    os << r.check << ',' << r.detail << ',' << format_double(r.value) << ','
       << format_double(r.reference) << ',' << format_double(r.tolerance) << ',';
    if (std::isnan(r.sigma_distance))
      os << "";
    else
      os << format_double(r.sigma_distance);
    os << ',' << (r.pass ? "pass" : "FAIL") << ',' << r.note << "\n";
  }
  return os.str();
}

std::string simulate_csv(const Scenario& sc, int threads_override) {
  MCConfig mc = sc.mc;
  if (threads_override > 0) mc.threads = threads_override;
  std::ostringstream os;
  os << csv_header(sc);
  os << "quantity,arg,mean,stderr,n_paths,n_censored\n";
  auto row = [&](const std::string& q, double arg, const MCEstimate& e) {
    os << q << ',' << format_double(arg) << ',' << format_double(e.mean) << ','
       << format_double(e.stderr_) << ',' << e.n_paths << ',' << e.n_censored << "\n";
  };
  const auto& quantities = sc.outputs.quantities;
  auto wants = [&](const char* q) {
    return quantities.empty() ||
           std::find(quantities.begin(), quantities.end(), q) != quantities.end();
  };
  if (sc.model && wants("ruin")) {
    for (double x : sc.outputs.x_values)
      row("ruin", x, simulate_ruin(*sc.model, x, 0.0, mc));
    if (sc.outputs.alpha > 0.0)
      for (double x : sc.outputs.x_values)
        row("ruin_time", x, simulate_ruin(*sc.model, x, sc.outputs.alpha, mc));
  }
  if (sc.lattice && wants("lattice")) {
    for (double x : sc.outputs.x_values) {
      if (!(x > sc.lattice->level(sc.lattice->N) && x <= sc.lattice->b)) continue;
      const auto est = simulate_lattice(*sc.lattice, x, mc);
      row("lattice_rho", x, est.rho);
      row("lattice_mu", x, est.mu);
      row("lattice_v", x, est.v);
    }
  }
  if (sc.brownian && wants("brownian")) {
    for (double x : sc.outputs.x_values) {
      const auto& lat = sc.brownian->lattice;
      if (!(x > lat.level(lat.N) && x <= lat.b)) continue;
      const auto est = simulate_brownian_lattice(*sc.brownian, x, mc);
      row("brownian_rho", x, est.rho);
      row("brownian_v", x, est.v);
    }
  }
  return os.str();
}

std::string ruin_lt_csv(const Scenario& sc) {
  if (!sc.model) throw ScenarioError("ruin-lt: scenario needs a model section");
  RuinTransform rt(*sc.model, sc.series);
  std::ostringstream os;
  os << csv_header(sc);
  os << "re_s,im_s,re_rho,im_rho\n";
  auto grid = sc.outputs.s_values.empty() ? default_s_grid() : sc.outputs.s_values;
  for (const Complex& s : grid) {
    const Complex v = sc.model->mixture_p < 1.0 ? rt.generalized_ruin_lt(s)
                                                : rt.ruin_lt(s);
    os << format_double(s.real()) << ',' << format_double(s.imag()) << ','
       << format_double(v.real()) << ',' << format_double(v.imag()) << "\n";
  }
  return os.str();
}

std::string ruin_prob_csv(const Scenario& sc) {
  if (!sc.model) throw ScenarioError("ruin-prob: scenario needs a model section");
  RuinTransform rt(*sc.model, sc.series);
  std::ostringstream os;
  os << csv_header(sc);
  os << "x,value,raw,clamped,method_warning\n";
  for (double x : sc.outputs.x_values) {
    const auto r = ruin_probability(x, rt, sc.inversion, true);
    os << format_double(x) << ',' << format_double(r.value) << ','
       << format_double(r.raw) << ',' << (r.clamped_out_of_range ? 1 : 0) << ','
       << (r.method_warning ? 1 : 0) << "\n";
  }
  return os.str();
}

std::string ruin_time_csv(const Scenario& sc) {
  if (!sc.model) throw ScenarioError("ruin-time: scenario needs a model section");
  RuinTransform rt(*sc.model, sc.series);
  std::ostringstream os;
  os << csv_header(sc);
  os << "x,alpha,value\n";
  for (double x : sc.outputs.x_values) {
    const auto r = ruin_time_value(x, sc.outputs.alpha, rt, sc.inversion);
    os << format_double(x) << ',' << format_double(sc.outputs.alpha) << ','
       << format_double(r.value) << "\n";
  }
  return os.str();
}

std::string exit_csv(const Scenario& sc) {
  if (!sc.lattice) throw ScenarioError("exit: scenario needs a lattice section");
  auto sol = solve_exit(*sc.lattice, sc.lattice_numerics);
  std::ostringstream os;
  os << csv_header(sc);
  os << "quantity,arg,value\n";
  for (int n = 1; n <= sc.lattice->N; ++n)
    os << "rho_n," << n << ',' << format_double(sol.rho[n]) << "\n";
  for (int n = 0; n <= sc.lattice->N; ++n)
    os << "mu_n," << n << ',' << format_double(sol.mu[n]) << "\n";
  for (double x : sc.outputs.x_values) {
    if (!(x > sc.lattice->level(sc.lattice->N) && x <= sc.lattice->b)) continue;
    os << "rho_eval," << format_double(x) << ','
       << format_double(rho_eval(x, sol, sc.lattice_numerics)) << "\n";
    os << "mu_eval," << format_double(x) << ','
       << format_double(mu_eval(x, sol, sc.lattice_numerics)) << "\n";
  }
  os << "cond_exit,0," << format_double(sol.cond_exit) << "\n";
  return os.str();
}

std::string dividends_csv(const Scenario& sc) {
  if (!sc.lattice) throw ScenarioError("dividends: scenario needs a lattice section");
  auto sol = solve_exit(*sc.lattice, sc.lattice_numerics);
  solve_dividends(sol, sc.lattice_numerics);
  std::ostringstream os;
  os << csv_header(sc);
  os << "quantity,arg,value\n";
  for (int n = 0; n <= sc.lattice->N; ++n)
    os << "v_n," << n << ',' << format_double(sol.v[n]) << "\n";
  for (double x : sc.outputs.x_values) {
    if (!(x > sc.lattice->level(sc.lattice->N))) continue;
    os << "v_eval," << format_double(x) << ','
       << format_double(v_eval(x, sol, sc.lattice_numerics)) << "\n";
  }
  os << "cond_dividend,0," << format_double(sol.cond_dividend) << "\n";
  return os.str();
}

std::string brownian_csv(const Scenario& sc) {
  if (!sc.brownian) throw ScenarioError("brownian: scenario needs a brownian section");
  auto sol = solve_brownian(*sc.brownian, sc.brownian_numerics, true);
  std::ostringstream os;
  os << csv_header(sc);
  os << "quantity,arg,value\n";
  const int N = sc.brownian->lattice.N;
  for (int n = 0; n <= N; ++n)
    os << "rho_n," << n << ',' << format_double(sol.rho[n]) << "\n";
  for (int n = 0; n <= N; ++n)
    os << "v_n," << n << ',' << format_double(sol.v[n]) << "\n";
  for (double x : sc.outputs.x_values) {
    const auto& lat = sc.brownian->lattice;
    if (!(x > lat.level(lat.N) && x <= lat.b)) continue;
    os << "rho_eval," << format_double(x) << ','
       << format_double(rho_eval_brownian(x, sol)) << "\n";
    os << "v_eval," << format_double(x) << ','
       << format_double(v_eval_brownian(x, sol)) << "\n";
  }
  os << "quad_drift," << 0 << ',' << format_double(sol.quad_drift_rho) << "\n";
  return os.str();
}

}  // namespace dualgain
