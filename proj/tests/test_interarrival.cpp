#include <doctest.h>

#include <cmath>

#include "dualgain/interarrival.hpp"
#include "dualgain/params.hpp"
#include "oracles.hpp"

using namespace dualgain;

namespace {

InterarrivalSpec make_hyper() {
  return InterarrivalSpec::hyper_exponential({0.3, 0.7}, {0.8, 2.5});
}

}  // namespace

TEST_CASE("lst(0) = 1 and closed-form spot values") {
  CHECK(InterarrivalSpec::exponential(1.0).lst_real(0.0) == doctest::Approx(1.0));
  CHECK(InterarrivalSpec::deterministic(2.0).lst_real(0.5) ==
        doctest::Approx(std::exp(-1.0)));
  CHECK(InterarrivalSpec::erlang(2, 3.0).lst_real(3.0) == doctest::Approx(0.25));
  CHECK(make_hyper().lst_real(0.0) == doctest::Approx(1.0));
  CHECK(InterarrivalSpec::erlang(2, 3.0).lst_real(0.0) == doctest::Approx(1.0));
}

TEST_CASE("|lst(s)| <= 1 on the closed right half-plane") {
  const auto specs = {InterarrivalSpec::exponential(0.7), InterarrivalSpec::erlang(3, 2.0),
                      InterarrivalSpec::deterministic(1.3), make_hyper()};
  for (const auto& sp : specs)
    for (double re : {0.0, 0.1, 1.0, 10.0})
      for (double im : {-20.0, -1.0, 0.0, 0.5, 7.0})
        CHECK(std::abs(sp.lst(Complex(re, im))) <= 1.0 + 1e-12);
}

TEST_CASE("lst rejects arguments at or beyond the nearest pole") {
  CHECK_THROWS_WITH_AS(InterarrivalSpec::exponential(1.0).lst(Complex(-1.5, 0.0)),
                       "LST pole", std::domain_error);
  CHECK_THROWS_AS(make_hyper().lst(Complex(-0.9, 2.0)), std::domain_error);
  // Deterministic is entire.
  CHECK(InterarrivalSpec::deterministic(1.0).lst(Complex(-3.0, 0.0)).real() ==
        doctest::Approx(std::exp(3.0)));
}

TEST_CASE("mean matches -lst'(0) by central difference") {
  const auto specs = {InterarrivalSpec::exponential(0.7), InterarrivalSpec::erlang(3, 2.0),
                      InterarrivalSpec::deterministic(1.3), make_hyper()};
  for (const auto& sp : specs) {
    const double h = 1e-6;
    const double d = (sp.lst_real(h) - sp.lst_real(-h)) / (2.0 * h);
    CHECK(sp.mean() == doctest::Approx(-d).epsilon(1e-8));
  }
}

TEST_CASE("quadrature of the density reproduces the transform") {
  const auto specs = {InterarrivalSpec::exponential(0.7), InterarrivalSpec::erlang(3, 2.0),
                      make_hyper()};
  for (const auto& sp : specs) {
    for (double s : {0.0, 0.5, 2.0, 10.0}) {
      // Truncate where the integrand tail is below 1e-12.
      const double upper = 60.0 / std::max(0.5, sp.min_rate());
      const double got = oracle::integrate(
          [&](double t) { return std::exp(-s * t) * sp.density(t); }, 0.0, upper, 1e-13);
      CHECK(got == doctest::Approx(sp.lst_real(s)).epsilon(1e-8));
    }
  }
}

TEST_CASE("density is rejected for deterministic interarrivals") {
  CHECK_THROWS_AS(InterarrivalSpec::deterministic(1.0).density(0.5), std::domain_error);
}

TEST_CASE("sampler mean within 4 standard errors over 1e6 draws") {
  const auto specs = {InterarrivalSpec::exponential(0.7), InterarrivalSpec::erlang(3, 2.0),
                      InterarrivalSpec::deterministic(1.3), make_hyper()};
  for (const auto& sp : specs) {
    Rng rng(2024);
    const int n = 1'000'000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = sp.sample(rng);
      sum += t;
      sumsq += t * t;
    }
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean);
    const double se = std::sqrt(var / n);
    CHECK(std::abs(mean - sp.mean()) <= 4.0 * se + 1e-9 * sp.mean());
  }
}

TEST_CASE("hyper-exponential weight validation") {
  CHECK_THROWS_AS(InterarrivalSpec::hyper_exponential({0.5, 0.6}, {1.0, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(InterarrivalSpec::hyper_exponential({-0.5, 1.5}, {1.0, 2.0}),
                  std::invalid_argument);
}

TEST_CASE("drift classification") {
  DualModelParams p;
  p.a = 0.5;
  p.mu = 1.0;
  p.interarrival = InterarrivalSpec::exponential(1.0);
  CHECK(classify_drift(p) == DriftClass::Transient);

  p.a = 0.0;
  p.mu = 2.0;  // mean interarrival 1 >= 1/mu = 0.5
  CHECK(classify_drift(p) == DriftClass::CertainRuin);

  p.interarrival = InterarrivalSpec::exponential(2.0);
  p.mu = 1.0;  // mean 0.5 < 1
  CHECK(classify_drift(p) == DriftClass::Transient);

  p.interarrival = InterarrivalSpec::exponential(1.0);
  p.mu = 1.0;
  CHECK(classify_drift(p) == DriftClass::Critical);
}
