#include "dualgain/scale.hpp"

#include <cmath>
#include <stdexcept>

namespace dualgain {

namespace {

// (1 - e^{-t}) with the small-argument series handled by expm1.
double one_minus_exp(double t) { return -std::expm1(-t); }

}  // namespace

ScaleFamily::ScaleFamily(double eta, double sigma, double q_eff)
    : eta_(eta), sigma_(sigma), q_(q_eff) {
  if (sigma <= 0.0) throw std::invalid_argument("scale: sigma must be > 0");
  if (q_eff < 0.0) throw std::invalid_argument("scale: q_eff must be >= 0");
  disc_ = eta_ * eta_ + 2.0 * q_ * sigma_ * sigma_;
  d_ = std::sqrt(disc_);
  wp_ = (d_ - eta_) / (sigma_ * sigma_);
  wm_ = (d_ + eta_) / (sigma_ * sigma_);
  gamma_ = wp_ + wm_;  // = 2 D / sigma^2
  if (gamma_ <= 0.0)
    throw std::invalid_argument("scale: degenerate family (eta = q_eff = 0)");
}

double ScaleFamily::psi(double theta) const {
  return eta_ * theta + 0.5 * sigma_ * sigma_ * theta * theta;
}

double ScaleFamily::phi_inverse() const { return wp_; }

double ScaleFamily::w(double x) const {
  if (x < 0.0) return 0.0;
  // (e^{wp x} - e^{-wm x})/D = (2/sigma^2) e^{wp x} (1 - e^{-gamma x})/gamma.
  return 2.0 / (sigma_ * sigma_) * std::exp(wp_ * x) * one_minus_exp(gamma_ * x) / gamma_;
}

double ScaleFamily::w_prime(double x) const {
  if (x < 0.0) return 0.0;
  return 2.0 / (sigma_ * sigma_) * std::exp(wp_ * x) *
         (wp_ + wm_ * std::exp(-gamma_ * x)) / gamma_;
}

double ScaleFamily::z(double x) const {
  if (x <= 0.0) return 1.0;
  return (wm_ * std::exp(wp_ * x) + wp_ * std::exp(-wm_ * x)) / gamma_;
}

double ScaleFamily::wbar(double x) const {
  if (x <= 0.0) return 0.0;
  // int_0^x W = [ (e^{wp x} - 1)/wp + (e^{-wm x} - 1)/wm ] / D, with the
  // wm -> 0 (q_eff = 0, eta < 0) limit taken through the series.
  const double first = std::expm1(wp_ * x) / wp_;
  double second;
  if (wm_ * x > 1e-8)
    second = std::expm1(-wm_ * x) / wm_;
  else
    second = -x * (1.0 - 0.5 * wm_ * x);
  return (first + second) / d_;
}

double ScaleFamily::exit_up(double u, double span) const {
  if (u <= 0.0) return 0.0;
  if (u >= span) return 1.0;
  return std::exp(-wp_ * (span - u)) * one_minus_exp(gamma_ * u) /
         one_minus_exp(gamma_ * span);
}

double ScaleFamily::exit_down(double u, double span) const {
  if (u <= 0.0) return 1.0;
  if (u >= span) return 0.0;
  const double eg_span = std::exp(-gamma_ * span);
  const double denom = 1.0 - eg_span;
  const double rest = one_minus_exp(gamma_ * (span - u)) / denom;
  // e^{-wm u}/gamma * [ wm * rest + wp * (1 - e^{-gamma(span-u)}(1-e^{-gamma u})/denom) ]
  const double second =
      1.0 - std::exp(-gamma_ * (span - u)) * one_minus_exp(gamma_ * u) / denom;
  return std::exp(-wm_ * u) * (wm_ * rest + wp_ * second) / gamma_;
}

double ScaleFamily::resolvent(double x, double y, double alpha, double beta) const {
  if (y <= alpha || y >= beta || x <= alpha || x >= beta) return 0.0;
  const double den = d_ * one_minus_exp(gamma_ * (beta - alpha));
  if (y <= x)
    return std::exp(-wm_ * (x - y)) * one_minus_exp(gamma_ * (y - alpha)) *
           one_minus_exp(gamma_ * (beta - x)) / den;
  return std::exp(-wp_ * (y - x)) * one_minus_exp(gamma_ * (x - alpha)) *
         one_minus_exp(gamma_ * (beta - y)) / den;
}

double ScaleFamily::reflected_resolvent(double x, double y, double alpha,
                                        double b) const {
  if (y <= alpha || y > b || x <= alpha || x > b) return 0.0;
  const double den = d_ * (wp_ + wm_ * std::exp(-gamma_ * (b - alpha)));
  if (y <= x)
    return std::exp(-wm_ * (x - y)) * one_minus_exp(gamma_ * (y - alpha)) *
           (wp_ + wm_ * std::exp(-gamma_ * (b - x))) / den;
  return std::exp(-wp_ * (y - x)) * one_minus_exp(gamma_ * (x - alpha)) *
         (wp_ + wm_ * std::exp(-gamma_ * (b - y))) / den;
}

double ScaleFamily::barrier_dividend_rate(double b, double alpha) const {
  const double span = b - alpha;
  if (span <= 0.0) throw std::domain_error("barrier_dividend_rate: b must exceed alpha");
  return one_minus_exp(gamma_ * span) / (wp_ + wm_ * std::exp(-gamma_ * span));
}

double ScaleFamily::reflected_exit(double x, double alpha, double b) const {
  const double u = x - alpha;
  if (u <= 0.0) return 1.0;
  const double span = b - alpha;
  const double eb = std::exp(-gamma_ * (b - x));
  const double num = wp_ + (wp_ * one_minus_exp(gamma_ * u) + wm_) * eb;
  return std::exp(-wm_ * u) *
         (wp_ + wm_ * num / (wp_ + wm_ * std::exp(-gamma_ * span))) / gamma_;
}

}  // namespace dualgain
