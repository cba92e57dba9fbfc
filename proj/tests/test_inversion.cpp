#include <doctest.h>

#include <cmath>
#include <vector>

#include "dualgain/inversion.hpp"

using namespace dualgain;

TEST_CASE("known transform pairs invert to stated accuracy") {
  InversionControl c;
  for (auto method : {InversionControl::Method::EulerSummation,
                      InversionControl::Method::Talbot}) {
    c.method = method;
    // 1/(s+1) -> e^{-x}
    auto r1 = invert([](Complex s) { return 1.0 / (s + 1.0); }, 1.0, c);
    CHECK(std::abs(r1.value - std::exp(-1.0)) < 1e-7);
    // 1/s -> 1
    auto r2 = invert([](Complex s) { return 1.0 / s; }, 5.0, c);
    CHECK(std::abs(r2.value - 1.0) < 1e-7);
    // 1/s^2 -> x
    auto r3 = invert([](Complex s) { return 1.0 / (s * s); }, 2.0, c);
    CHECK(std::abs(r3.value - 2.0) < 1e-6);
  }
}

TEST_CASE("cross-checked inversion flags nothing on clean transforms") {
  auto r = invert_cross_checked([](Complex s) { return 1.0 / (s + 2.0); }, 0.7);
  CHECK(!r.method_warning);
  CHECK(std::abs(r.value - std::exp(-1.4)) < 1e-7);
}

TEST_CASE("ruin probability: certain-ruin model inverts to 1, clamped") {
  DualModelParams p;
  p.a = 0.0;
  p.mu = 2.0;
  p.interarrival = InterarrivalSpec::exponential(1.0);
  RuinTransform rt(p);
  for (double x : {0.5, 1.0, 3.0}) {
    const auto r = ruin_probability(x, rt, {}, /*cross_check=*/true);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(!r.clamped_out_of_range);
    CHECK(!r.method_warning);
  }
}

TEST_CASE("ruin probability: proportional model, both methods agree") {
  DualModelParams p;
  p.a = 0.5;
  p.mu = 1.0;
  p.interarrival = InterarrivalSpec::exponential(1.0);
  RuinTransform rt(p);
  InversionControl ce, ct;
  ct.method = InversionControl::Method::Talbot;
  for (double x : {0.5, 1.0, 2.0}) {
    const auto re = ruin_probability(x, rt, ce);
    const auto rta = ruin_probability(x, rt, ct);
    CHECK(re.value == doctest::Approx(rta.value).epsilon(1e-6));
    CHECK(re.value > 0.0);
    CHECK(re.value < 1.0);
  }
}

TEST_CASE("integral-equation residual of the recovered ruin probability") {
  // R(x) = 1 - F(x) + int_0^x int_0^inf R((1+a)(x-t)+y) mu e^{-mu y} dy dF(t),
  // checked by trapezoid quadrature over a grid of recovered values.
  DualModelParams p;
  p.a = 0.5;
  p.mu = 1.0;
  p.interarrival = InterarrivalSpec::exponential(1.0);
  RuinTransform rt(p);
  InversionControl c;

  // Precompute R on a fine grid once; R(0) = 1 (zero capital, immediate ruin).
  const double Y = 18.0;
  const double zmax = 1.5 * 2.0 + Y + 0.1;
  const int nz = 4096;
  std::vector<double> rgrid(nz + 1);
  rgrid[0] = 1.0;
  for (int i = 1; i <= nz; ++i)
    rgrid[i] = ruin_probability(zmax * i / nz, rt, c).value;
  auto R = [&](double z) {
    const double u = std::min(std::max(z, 0.0), zmax) / zmax * nz;
    const int i = std::min(static_cast<int>(u), nz - 1);
    const double w = u - i;
    return (1.0 - w) * rgrid[i] + w * rgrid[i + 1];
  };

  auto simpson = [](auto f, double lo, double hi, int n) {
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += f(lo + (hi - lo) * i / n) * (i % 2 ? 4.0 : 2.0);
    return s * (hi - lo) / (3.0 * n);
  };

  for (double x : {0.5, 1.0, 2.0}) {
    auto inner = [&](double t) {
      return std::exp(-t) * simpson([&](double y) { return R(1.5 * (x - t) + y) * std::exp(-y); },
                                    0.0, Y, 256);
    };
    const double outer = simpson(inner, 0.0, x, 256);
    const double resid = R(x) - (1.0 - p.interarrival.cdf(x)) - outer;
    CHECK(std::abs(resid) < 1e-4);
  }
}

TEST_CASE("invert validates controls") {
  InversionControl c;
  c.terms = 10;
  CHECK_THROWS_AS(invert([](Complex s) { return 1.0 / s; }, 1.0, c),
                  std::invalid_argument);
  CHECK_THROWS_AS(invert([](Complex s) { return 1.0 / s; }, -1.0, {}),
                  std::domain_error);
}
