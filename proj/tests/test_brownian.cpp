#include <doctest.h>

#include <cmath>
#include <functional>

#include "dualgain/brownian.hpp"
#include "dualgain/lattice.hpp"
#include "dualgain/mc.hpp"
#include "oracles.hpp"

using namespace dualgain;

namespace {

BrownianParams std_bparams(int N = 4) {
  BrownianParams bp;
  bp.eta = -1.0;
  bp.sigma = 0.3;
  bp.lambda = 1.0;
  bp.q = 0.1;
  bp.lattice.b = 2.0;
  bp.lattice.N = N;
  bp.lattice.a = 0.5;
  bp.lattice.lambda = 1.0;
  bp.lattice.q = 0.1;
  return bp;
}

// Nested-quadrature oracles built directly on the resolvent composition;
// independent of the chain/coefficient machinery they check.
struct Oracle {
  const BrownianParams& p;
  ScaleFamily sc;
  explicit Oracle(const BrownianParams& bp)
      : p(bp), sc(bp.eta, bp.sigma, bp.q + bp.lambda) {}
  double L(int n) const { return p.lattice.level(n); }

  double r(int n, int k, double x, double tol = 1e-9) const {
    if (k == 0) return sc.exit_down(x - L(n), L(n - 1) - L(n));
    return p.lambda *
           oracle::integrate(
               [&](double y) {
                 return sc.resolvent(x, y, L(n), L(n - 1)) *
                        r(n - 1, k - 1, (1.0 + p.lattice.a) * y, tol * 10);
               },
               L(n), L(n - 1), tol);
  }

  double omega(int n, int k, double x, double tol = 1e-9) const {
    if (k == 1) return sc.exit_up(x - L(n), L(n - 1) - L(n));
    return p.lambda *
           oracle::integrate(
               [&](double y) {
                 return sc.resolvent(x, y, L(n), L(n - 1)) *
                        omega(n - 1, k - 1, (1.0 + p.lattice.a) * y, tol * 10);
               },
               L(n), L(n - 1), tol);
  }

  double t_up(int n, double x, double tol = 1e-9) const {
    return p.lambda *
           oracle::integrate(
               [&](double y) {
                 const double z = (1.0 + p.lattice.a) * y;
                 return sc.resolvent(x, y, L(n), L(n - 1)) *
                        (n == 1 ? 1.0 : t_up(n - 1, z, tol * 10));
               },
               L(n), L(n - 1), tol);
  }

  double v_jump(int n, double x, double tol = 1e-9) const {
    return p.lambda *
           oracle::integrate(
               [&](double y) {
                 const double z = (1.0 + p.lattice.a) * y;
                 return sc.resolvent(x, y, L(n), L(n - 1)) *
                        (n == 1 ? z - L(0) : v_jump(n - 1, z, tol * 10));
               },
               L(n), L(n - 1), tol);
  }
};

}  // namespace

TEST_CASE("r family: base case, stepped members vs nested quadrature") {
  const auto bp = std_bparams();
  BrownianFamilies fam(bp, {}, true);
  Oracle orc(bp);
  const double x32 = 0.5 * (orc.L(3) + orc.L(2));

  // k = 0 is the plain killed two-sided exit.
  CHECK(fam.r(3, 0, x32) == doctest::Approx(orc.r(3, 0, x32)).epsilon(1e-12));
  // k = 1 and 2: recursion output vs direct quadrature of the composition.
  CHECK(fam.r(3, 1, x32) == doctest::Approx(orc.r(3, 1, x32)).epsilon(1e-6));
  CHECK(fam.r(3, 2, x32) == doctest::Approx(orc.r(3, 2, x32)).epsilon(1e-6));
  // k = 3 exercises the accumulated (1+a)^{m-1} step factors.
  const double x43 = 0.5 * (orc.L(4) + orc.L(3));
  CHECK(fam.r(4, 3, x43) == doctest::Approx(orc.r(4, 3, x43)).epsilon(1e-5));
}

TEST_CASE("omega family vs nested quadrature, with the q = 0 ruin limit") {
  const auto bp = std_bparams();
  BrownianFamilies fam(bp, {}, true);
  Oracle orc(bp);
  const double x32 = 0.55 * orc.L(2) + 0.45 * orc.L(3);
  CHECK(fam.omega(3, 1, x32) == doctest::Approx(orc.omega(3, 1, x32)).epsilon(1e-12));
  CHECK(fam.omega(3, 2, x32) == doctest::Approx(orc.omega(3, 2, x32)).epsilon(1e-6));
  CHECK(fam.omega(3, 3, x32) == doctest::Approx(orc.omega(3, 3, x32)).epsilon(1e-5));

  // q_eff -> 0: the up-exit transform approaches the classical two-sided
  // ruin probability of the drifted Brownian motion.
  ScaleFamily tiny(-1.0, 0.3, 1e-12);
  const double u = 0.2, span = 0.5, c = 2.0 / (0.3 * 0.3);
  const double classical = std::expm1(c * u) / std::expm1(c * span);
  CHECK(tiny.exit_up(u, span) == doctest::Approx(classical).epsilon(1e-8));
}

TEST_CASE("T and vJ families vs nested quadrature") {
  const auto bp = std_bparams();
  BrownianFamilies fam(bp, {}, true);
  Oracle orc(bp);
  const double x10 = 0.5 * (orc.L(1) + orc.L(0));
  CHECK(fam.t_up(1, x10) == doctest::Approx(orc.t_up(1, x10)).epsilon(1e-6));
  CHECK(fam.v_jump(1, x10) == doctest::Approx(orc.v_jump(1, x10)).epsilon(1e-6));
  const double x21 = 0.5 * (orc.L(2) + orc.L(1));
  CHECK(fam.t_up(2, x21) == doctest::Approx(orc.t_up(2, x21)).epsilon(1e-6));
  CHECK(fam.v_jump(2, x21) == doctest::Approx(orc.v_jump(2, x21)).epsilon(1e-6));
  const double x32 = 0.5 * (orc.L(3) + orc.L(2));
  CHECK(fam.t_up(3, x32) == doctest::Approx(orc.t_up(3, x32)).epsilon(1e-5));
  CHECK(fam.v_jump(3, x32) == doctest::Approx(orc.v_jump(3, x32)).epsilon(1e-5));
}

TEST_CASE("coefficient recursion reproduces the hand-derived base cases") {
  const auto bp = std_bparams();
  BrownianFamilies fam(bp, {}, true);
  const ScaleFamily& sc = fam.scale();
  const double lambda = bp.lambda, a = bp.lattice.a;
  auto L = [&](int n) { return bp.lattice.level(n); };

  // r_{n,n-1} = A0 W(x-L_n) - lambda (W * xi_{n-1,1+a})(x-L_n) with
  // A0 = lambda (W * xi)(Delta_n) / W(Delta_n).
  for (int n : {2, 3}) {
    const double dn = L(n - 1) - L(n);
    const double conv = oracle::convolve_at(
        [&](double t) { return sc.w(t); },
        [&](double t) { return sc.exit_down((1.0 + a) * t, L(n - 2) - L(n - 1)); }, dn,
        1e-12);
    const auto c = fam.r_coefficients(n, 1);  // {c0, c_term}
    REQUIRE(c.size() == 2);
    CHECK(c[1] == doctest::Approx(-lambda).epsilon(1e-14));
    CHECK(c[0] == doctest::Approx(lambda * conv / sc.w(dn)).epsilon(1e-5));
  }

  // k = 2 structural relations: A_{1,n,n-2} = lambda A_{0,n-1,n-2},
  // A_{2,n,n-2} = lambda (1+a) A_{1,n-1,n-2} = lambda^2 (1+a).
  {
    const auto c32 = fam.r_coefficients(3, 2);   // {c0, c1, c_term}
    const auto c21 = fam.r_coefficients(2, 1);   // {A0, -lambda}
    REQUIRE(c32.size() == 3);
    CHECK(c32[1] == doctest::Approx(-lambda * c21[0]).epsilon(1e-12));
    CHECK(c32[2] == doctest::Approx(lambda * lambda * (1.0 + a)).epsilon(1e-12));
  }
  // omega: B_{1,n,n-2} = lambda, B_{0} = lambda (W * Omega)(Delta)/W(Delta).
  {
    const auto b32 = fam.omega_coefficients(3, 2);
    REQUIRE(b32.size() == 2);
    CHECK(b32[1] == doctest::Approx(-lambda).epsilon(1e-14));
    const double dn = L(2) - L(3);
    const double conv = oracle::convolve_at(
        [&](double t) { return sc.w(t); },
        [&](double t) { return sc.exit_up((1.0 + a) * t, L(1) - L(2)); }, dn, 1e-12);
    CHECK(b32[0] == doctest::Approx(lambda * conv / sc.w(dn)).epsilon(1e-5));
  }
  // T: A_{1,T,1} = lambda, A_{1,T,0} = lambda Wbar(Delta_1)/W(Delta_1);
  //    A_{2,T,1} = lambda A_{1,T,0}, A_{2,T,2} = lambda A_{1,T,1}.
  {
    const auto t1 = fam.t_coefficients(1);
    REQUIRE(t1.size() == 2);
    CHECK(t1[1] == doctest::Approx(-lambda).epsilon(1e-14));
    const double d1 = L(0) - L(1);
    CHECK(t1[0] == doctest::Approx(lambda * sc.wbar(d1) / sc.w(d1)).epsilon(1e-6));
    const auto t2 = fam.t_coefficients(2);
    REQUIRE(t2.size() == 3);
    CHECK(t2[1] == doctest::Approx(-lambda * t1[0]).epsilon(1e-12));
    // Stored against the running-integral chain int_0^x C_1; the textbook
    // chain W * Wbar_{1+a} equals (1+a) times it, so lambda^2 becomes
    // lambda^2 (1+a) in this basis.
    CHECK(t2[2] == doctest::Approx(lambda * lambda * (1.0 + a)).epsilon(1e-12));
  }
  // vJ: A_{1,f,1} = lambda; A_{2,f,1} = lambda A_{1,f,0},
  //     A_{2,f,2} = lambda (1+a) A_{1,f,1}.
  {
    const auto f1 = fam.v_jump_coefficients(1);
    REQUIRE(f1.size() == 2);
    CHECK(f1[1] == doctest::Approx(-lambda).epsilon(1e-14));
    const auto f2 = fam.v_jump_coefficients(2);
    REQUIRE(f2.size() == 3);
    CHECK(f2[1] == doctest::Approx(-lambda * f1[0]).epsilon(1e-12));
    CHECK(f2[2] == doctest::Approx(lambda * lambda * (1.0 + a)).epsilon(1e-12));
  }
}

TEST_CASE("family members take values in [0,1] and vanish at interval tops") {
  const auto bp = std_bparams();
  BrownianFamilies fam(bp, {}, true);
  auto L = [&](int n) { return bp.lattice.level(n); };
  for (int n = 1; n <= 4; ++n) {
    for (double f : {0.05, 0.35, 0.7, 0.98}) {
      const double x = L(n) + f * (L(n - 1) - L(n));
      double total = fam.r(n, 0, x);
      for (int k = 1; k <= n - 1; ++k) {
        const double rv = fam.r(n, k, x), ov = fam.omega(n, k, x);
        CHECK(rv >= -1e-9);
        CHECK(rv <= 1.0 + 1e-9);
        CHECK(ov >= -1e-9);
        CHECK(ov <= 1.0 + 1e-9);
        total += rv + ov;
      }
      total += fam.omega(n, n, x) + fam.t_up(n, x);
      CHECK(total <= 1.0 + 1e-6);  // disjoint first-passage modes
      CHECK(fam.v_jump(n, x) >= -1e-12);
    }
    // Stepped members vanish at the top of their interval by construction.
    for (int k = 2; k <= n - 1; ++k)
      CHECK(std::abs(fam.r(n, k, L(n - 1))) < 1e-9);
  }
}

TEST_CASE("brownian exit system: boundaries, ranges, quadrature stability") {
  const auto bp = std_bparams();
  auto sol = solve_brownian(bp, {}, true);
  CHECK(sol.rho[0] == 0.0);
  CHECK(sol.rho[4] == 1.0);
  for (int n = 1; n <= 3; ++n) {
    CHECK(sol.rho[n] > 0.0);
    CHECK(sol.rho[n] < 1.0);
    CHECK(sol.rho[n] >= sol.rho[n - 1] - 1e-12);  // lower start, likelier ruin
  }
  CHECK(sol.quad_drift_rho < 1e-7);
  CHECK(sol.quad_drift_v < 1e-7);
  CHECK(sol.v[4] == 0.0);
  for (int n = 0; n <= 3; ++n) CHECK(sol.v[n] >= 0.0);
  // Continuity of the pointwise identities at lattice points.
  auto L = [&](int n) { return bp.lattice.level(n); };
  for (int n = 1; n <= 3; ++n) {
    CHECK(rho_eval_brownian(L(n) * (1.0 + 1e-7), sol) ==
          doctest::Approx(sol.rho[n]).epsilon(1e-4));
    CHECK(v_eval_brownian(L(n) * (1.0 + 1e-7), sol) ==
          doctest::Approx(sol.v[n]).epsilon(1e-4));
  }
  CHECK(v_eval_brownian(bp.lattice.b + 0.5, sol) ==
        doctest::Approx(sol.v[0] + 0.5).epsilon(1e-14));
}

TEST_CASE("brownian solver matches Euler simulation") {
  const auto bp = std_bparams();
  auto sol = solve_brownian(bp, {}, true);
  MCConfig cfg;
  cfg.paths = 30'000;
  cfg.seed = 17;
  cfg.threads = 1;
  cfg.euler_dt = 2e-4;
  const double allowance = 0.02;  // O(sqrt(dt)) barrier bias at this dt
  auto L = [&](int n) { return bp.lattice.level(n); };

  const auto at2 = simulate_brownian_lattice(bp, L(2), cfg);
  CHECK(std::abs(sol.rho[2] - at2.rho.mean) <=
        3.0 * at2.rho.stderr_ + allowance);
  const auto atb = simulate_brownian_lattice(bp, bp.lattice.b, cfg);
  CHECK(std::abs(sol.v[0] - atb.v.mean) <=
        3.0 * atb.v.stderr_ + allowance * sol.v[0] + allowance);

  const double xi = 0.5 * (L(2) + L(1));
  const auto atx = simulate_brownian_lattice(bp, xi, cfg);
  CHECK(std::abs(rho_eval_brownian(xi, sol) - atx.rho.mean) <=
        3.0 * atx.rho.stderr_ + allowance);
  CHECK(std::abs(v_eval_brownian(xi, sol) - atx.v.mean) <=
        3.0 * atx.v.stderr_ + allowance * sol.v[0] + allowance);
}

TEST_CASE("degenerate sigma approaches the drift-only lattice solver") {
  BrownianParams bp;
  bp.eta = -1.0;
  bp.sigma = 0.01;
  bp.lambda = 1.0;
  bp.q = 0.1;
  bp.lattice.b = 1.5;
  bp.lattice.N = 8;
  bp.lattice.a = 5e-4;
  bp.lattice.lambda = 1.0;
  bp.lattice.q = 0.1;
  BrownianNumerics num;
  num.grid_points = 513;
  auto sol = solve_brownian(bp, num, false);

  auto lat = solve_exit(bp.lattice);
  for (int n = 1; n <= 7; ++n)
    CHECK(sol.rho[n] == doctest::Approx(lat.rho[n]).epsilon(0.02));
}

TEST_CASE("halving the chain grid moves lattice values only marginally") {
  const auto bp = std_bparams();
  BrownianNumerics fine, coarse;
  fine.grid_points = 2049;
  coarse.grid_points = 1025;
  auto sf = solve_brownian(bp, fine, true);
  auto sc = solve_brownian(bp, coarse, true);
  for (int n = 0; n <= 4; ++n) {
    CHECK(std::abs(sf.rho[n] - sc.rho[n]) < 1e-5);
    CHECK(std::abs(sf.v[n] - sc.v[n]) < 1e-5);
  }
}

TEST_CASE("conditioning guard rejects drift-dominated gap configurations") {
  BrownianParams bp = std_bparams();
  bp.sigma = 0.01;  // omega_plus * top gap in the thousands
  CHECK_THROWS_AS(BrownianFamilies(bp, {}, false), std::invalid_argument);
}
