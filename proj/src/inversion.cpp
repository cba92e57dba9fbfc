#include "dualgain/inversion.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dualgain {

namespace {

constexpr double kPi = std::numbers::pi;

// Binomial averaging C(M, j)/2^M over partial sums starting at `shift`
// (Abate-Whitt Euler summation).
double euler_from_partials(const std::vector<double>& partial, int M, int shift) {
  double acc = 0.0, w = std::pow(2.0, -M);
  for (int j = 0; j <= M; ++j) {
    acc += w * partial[shift + j];
    w *= static_cast<double>(M - j) / (j + 1);
  }
  return acc;
}

// Fixed-Talbot contour (Abate-Valko): s(theta) = r theta (cot theta + i),
// r = 2M/(5x).
InversionResult invert_talbot(const TransformFn& F, double x,
                              const InversionControl& c) {
  const int M = std::max(10, (c.terms - 1) / 2);
  const double r = 2.0 * M / (5.0 * x);
  double acc = 0.5 * std::exp(r * x) * F(Complex(r, 0.0)).real();
  double acc_prev = acc;
  for (int k = 1; k < M; ++k) {
    const double th = k * kPi / M;
    const double cot = std::cos(th) / std::sin(th);
    const Complex s(r * th * cot, r * th);
    const double sigma = th + (th * cot - 1.0) * cot;
    acc_prev = acc;
    acc += (std::exp(s * x) * F(s) * Complex(1.0, sigma)).real();
  }
  InversionResult res;
  res.value = acc * r / M;
  res.error_estimate = std::abs((acc - acc_prev) * r / M);
  return res;
}

}  // namespace

void InversionControl::validate() const {
  if (terms < 11 || terms % 2 == 0)
    throw std::invalid_argument("inversion: terms must be odd and >= 11");
  if (precision_target <= 0.0)
    throw std::invalid_argument("inversion: precision_target must be > 0");
}

InversionResult invert(const TransformFn& transform, double x,
                       const InversionControl& control) {
  control.validate();
  if (x <= 0.0) throw std::domain_error("invert: x must be > 0");
  if (control.method == InversionControl::Method::Talbot)
    return invert_talbot(transform, x, control);
  // Recompute Euler cleanly (the lambda above keeps both estimates local).
  const int M = (control.terms - 1) / 2;
  const double A = control.contour_shift;
  const double h = kPi / x;
  std::vector<double> partial(2 * M + 1);
  double sum = 0.5 * transform(Complex(A / (2.0 * x), 0.0)).real();
  partial[0] = sum;
  double sign = -1.0;
  for (int k = 1; k <= 2 * M; ++k) {
    sum += sign * transform(Complex(A / (2.0 * x), k * h)).real();
    partial[k] = sum;
    sign = -sign;
  }
  const double base = std::exp(A / 2.0) / x;
  const double accM = euler_from_partials(partial, M, M);
  const double accM1 = euler_from_partials(partial, M - 1, M);
  InversionResult r;
  r.value = base * accM;
  r.error_estimate = std::abs(base * (accM - accM1)) + std::exp(-A) * std::abs(base * accM);
  return r;
}

InversionResult invert_cross_checked(const TransformFn& transform, double x,
                                     const InversionControl& control) {
  InversionControl eu = control;
  eu.method = InversionControl::Method::EulerSummation;
  InversionControl ta = control;
  ta.method = InversionControl::Method::Talbot;
  InversionResult primary = control.method == InversionControl::Method::Talbot
                                ? invert(transform, x, ta)
                                : invert(transform, x, eu);
  InversionResult other = control.method == InversionControl::Method::Talbot
                              ? invert(transform, x, eu)
                              : invert(transform, x, ta);
  if (std::abs(primary.value - other.value) > 10.0 * control.precision_target)
    primary.method_warning = true;
  primary.error_estimate =
      std::max(primary.error_estimate, std::abs(primary.value - other.value));
  return primary;
}

namespace {

RuinProbability clamp01(InversionResult inv, double tol) {
  RuinProbability r;
  r.raw = inv.value;
  r.method_warning = inv.method_warning;
  r.value = std::min(1.0, std::max(0.0, inv.value));
  r.clamped_out_of_range = inv.value < -tol || inv.value > 1.0 + tol;
  return r;
}

}  // namespace

RuinProbability ruin_probability(double x, const RuinTransform& rt,
                                 const InversionControl& control, bool cross_check) {
  if (x <= 0.0) throw std::domain_error("ruin_probability: x must be > 0");
  TransformFn f = [&rt](Complex s) { return rt.ruin_lt_continued(s); };
  const InversionResult inv =
      cross_check ? invert_cross_checked(f, x, control) : invert(f, x, control);
  return clamp01(inv, control.precision_target);
}

RuinProbability ruin_time_value(double x, double alpha, const RuinTransform& rt,
                                const InversionControl& control, bool cross_check) {
  if (x <= 0.0) throw std::domain_error("ruin_time_value: x must be > 0");
  TransformFn f = [&rt, alpha](Complex s) { return rt.ruin_time_lt_continued(s, alpha); };
  const InversionResult inv =
      cross_check ? invert_cross_checked(f, x, control) : invert(f, x, control);
  return clamp01(inv, control.precision_target);
}

}  // namespace dualgain
