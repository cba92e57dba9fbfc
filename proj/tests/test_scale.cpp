#include <doctest.h>

#include <cmath>

#include "dualgain/rng.hpp"
#include "dualgain/scale.hpp"
#include "oracles.hpp"

using namespace dualgain;

namespace {

// Independent series for eta = 0: 1/(psi - q) = sum q^k / psi^{k+1} inverts
// term by term to sum q^k (2/sigma^2)^{k+1} x^{2k+1} / (2k+1)!.
double w_series_driftless(double sigma, double q, double x) {
  double acc = 0.0, qk = 1.0;
  const double c = 2.0 / (sigma * sigma);
  for (int k = 0; k < 60; ++k) {
    double fact = 1.0;
    for (int j = 2; j <= 2 * k + 1; ++j) fact *= j;
    acc += qk * std::pow(c, k + 1) * std::pow(x, 2 * k + 1) / fact;
    qk *= q;
  }
  return acc;
}

// Naive textbook expressions, accurate at moderate parameters; the library
// versions must match them there and stay stable beyond.
struct Naive {
  double D, wp, wm;
  explicit Naive(const ScaleFamily& f)
      : D(std::sqrt(f.eta() * f.eta() + 2.0 * f.q_eff() * f.sigma() * f.sigma())),
        wp(f.omega_plus()),
        wm(f.omega_minus()) {}
  double w(double x) const {
    return x < 0 ? 0.0 : (std::exp(wp * x) - std::exp(-wm * x)) / D;
  }
  double wp_(double x) const {
    return (wp * std::exp(wp * x) + wm * std::exp(-wm * x)) / D;
  }
  double z(const ScaleFamily& f, double x) const {
    return 1.0 + f.q_eff() * oracle::integrate([&](double t) { return w(t); }, 0.0, x,
                                               1e-11);
  }
};

}  // namespace

TEST_CASE("scale function boundary values and basic shape") {
  ScaleFamily f(-1.0, 0.3, 1.1);
  CHECK(f.w(0.0) == 0.0);
  CHECK(f.w(-0.5) == 0.0);
  CHECK(f.z(0.0) == 1.0);
  CHECK(f.wbar(0.0) == 0.0);
  double prev = 0.0;
  for (double x = 0.05; x < 2.0; x += 0.05) {
    CHECK(f.w(x) > prev);
    prev = f.w(x);
  }
}

TEST_CASE("Laplace transform identity of W") {
  for (auto [eta, sigma, q] : {std::tuple{-1.0, 0.3, 1.1}, {0.5, 1.0, 0.7},
                               {0.0, 1.0, 0.5}}) {
    ScaleFamily f(eta, sigma, q);
    const double theta = f.phi_inverse() + 1.0;
    // Truncation: the integrand decays like e^{-x}; stay below the point
    // where W itself overflows (it grows like e^{phi x}).
    const double X = std::min(40.0, 0.97 * 709.0 / f.phi_inverse());
    const double got = oracle::integrate(
        [&](double x) { return std::exp(-theta * x) * f.w(x); }, 0.0, X, 1e-10);
    CHECK(got == doctest::Approx(1.0 / (f.psi(theta) - q)).epsilon(1e-6));
  }
}

TEST_CASE("driftless W matches the independent series re-derivation") {
  ScaleFamily f(0.0, 1.0, 0.5);
  CHECK(f.w(1.0) == doctest::Approx(w_series_driftless(1.0, 0.5, 1.0)).epsilon(1e-12));
  CHECK(f.w(0.25) == doctest::Approx(w_series_driftless(1.0, 0.5, 0.25)).epsilon(1e-12));
}

TEST_CASE("Z' = q_eff W and Wbar' = W by central differences") {
  ScaleFamily f(-1.0, 0.3, 1.1);
  const double h = 1e-6;
  for (double x : {0.1, 0.4, 0.9}) {
    const double zp = (f.z(x + h) - f.z(x - h)) / (2.0 * h);
    CHECK(zp == doctest::Approx(f.q_eff() * f.w(x)).epsilon(1e-6));
    const double wb = (f.wbar(x + h) - f.wbar(x - h)) / (2.0 * h);
    CHECK(wb == doctest::Approx(f.w(x)).epsilon(1e-6));
  }
}

TEST_CASE("factored evaluations match the textbook forms at moderate scales") {
  ScaleFamily f(-1.0, 0.3, 1.1);
  Naive n(f);
  const double alpha = 0.0, beta = 0.5;
  for (double x : {0.1, 0.25, 0.45}) {
    CHECK(f.w(x) == doctest::Approx(n.w(x)).epsilon(1e-12));
    CHECK(f.w_prime(x) == doctest::Approx(n.wp_(x)).epsilon(1e-12));
    CHECK(f.z(x) == doctest::Approx(n.z(f, x)).epsilon(1e-9));
    CHECK(f.exit_up(x - alpha, beta - alpha) ==
          doctest::Approx(n.w(x) / n.w(beta)).epsilon(1e-12));
    const double xi =
        n.z(f, x) - n.w(x) / n.w(beta) * n.z(f, beta);
    CHECK(f.exit_down(x - alpha, beta - alpha) == doctest::Approx(xi).epsilon(1e-8));
    for (double y : {0.1, 0.3, 0.49}) {
      const double direct = n.w(x) * n.w(beta - y) / n.w(beta) - n.w(x - y);
      CHECK(f.resolvent(x, y, alpha, beta) == doctest::Approx(direct).epsilon(1e-10));
    }
    for (double y : {0.1, 0.3, 0.5}) {
      const double direct = n.w(x) * n.wp_(beta - y) / n.wp_(beta) - n.w(x - y);
      CHECK(f.reflected_resolvent(x, y, alpha, beta) ==
            doctest::Approx(direct).epsilon(1e-10));
    }
    const double refl = n.z(f, x) - f.q_eff() * n.w(beta) / n.wp_(beta) * n.w(x);
    CHECK(f.reflected_exit(x, alpha, beta) == doctest::Approx(refl).epsilon(1e-8));
  }
  CHECK(f.barrier_dividend_rate(beta, alpha) ==
        doctest::Approx(n.w(beta) / n.wp_(beta)).epsilon(1e-12));
}

TEST_CASE("factored evaluations survive drift-dominated scales") {
  // omega_plus * span ~ 460: the textbook differences overflow/cancel here.
  ScaleFamily f(-1.0, 0.1, 1.1);
  const double span = 2.3;
  const double xd = f.exit_down(1.1, span);
  CHECK(xd > 0.0);
  CHECK(xd < 1.0);
  const double r = f.resolvent(1.1, 0.7, 0.0, span);
  CHECK(r > 0.0);
  CHECK(std::isfinite(r));
  // Pure drift limit: resolvent at y < x approaches e^{-q(x-y)/|eta|}/|eta|.
  ScaleFamily g(-1.0, 0.01, 0.7);
  const double approx = std::exp(-0.7 * 0.4) / 1.0;
  CHECK(g.resolvent(1.0, 0.6, 0.0, 2.0) == doctest::Approx(approx).epsilon(0.02));
}

TEST_CASE("resolvent vanishes at the kill boundaries and integrates correctly") {
  ScaleFamily f(-1.0, 0.3, 1.1);
  const double alpha = 0.1, beta = 0.9, x = 0.4;
  CHECK(f.resolvent(x, beta, alpha, beta) == 0.0);
  CHECK(f.resolvent(alpha, 0.5, alpha, beta) == 0.0);
  // q int u dy + E[e^{-q sigma_exit}] = 1 (three disjoint exit modes).
  const double mass = oracle::integrate(
      [&](double y) { return f.resolvent(x, y, alpha, beta); }, alpha, beta, 1e-12);
  const double total = f.q_eff() * mass + f.exit_up(x - alpha, beta - alpha) +
                       f.exit_down(x - alpha, beta - alpha);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("reflected exit transform at extreme discounting") {
  ScaleFamily f(-1.0, 0.3, 4000.0);
  CHECK(f.reflected_exit(0.4, 0.0, 0.5) < 1e-8);
  ScaleFamily g(-1.0, 0.3, 1.1);
  CHECK(g.reflected_exit(0.0, 0.0, 0.5) == 1.0);
}

TEST_CASE("exit transforms validated by Euler simulation") {
  // Two-sided exit of the Brownian motion with an exponential kill clock:
  // exactly what exit_down/exit_up compute at q_eff = q + lambda.
  const double eta = -1.0, sigma = 0.3, q = 0.1, lambda = 1.0;
  ScaleFamily f(eta, sigma, q + lambda);
  const double alpha = 0.0, beta = 0.5, x = 0.22;
  const double dt = 5e-4;
  const int n = 60'000;
  Rng rng(123);
  double down = 0.0, up = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = x, t = 0.0;
    double clock = rng.exponential(lambda);
    for (;;) {
      u += eta * dt + sigma * std::sqrt(dt) * rng.normal();
      t += dt;
      if (t >= clock) break;  // killed by the jump clock
      if (u <= alpha) {
        down += std::exp(-q * t);
        break;
      }
      if (u >= beta) {
        up += std::exp(-q * t);
        break;
      }
    }
  }
  const double allowance = 3.0 * sigma * std::sqrt(dt) * 4.0;  // barrier bias
  const double se = 1.5 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(down / n - f.exit_down(x - alpha, beta - alpha)) <
        3.0 * se + allowance);
  CHECK(std::abs(up / n - f.exit_up(x - alpha, beta - alpha)) < 3.0 * se + allowance);
}
