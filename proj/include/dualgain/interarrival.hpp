#pragma once

#include <complex>
#include <vector>

#include "dualgain/rng.hpp"

namespace dualgain {

using Complex = std::complex<double>;

// Renewal interarrival law with closed-form Laplace-Stieltjes transform.
// The variant set is closed on purpose: the transform modules evaluate
// phi at complex arguments, which a black-box sampler cannot supply.
class InterarrivalSpec {
 public:
  enum class Kind { Exponential, Erlang, Deterministic, HyperExponential };

  static InterarrivalSpec exponential(double rate);
  static InterarrivalSpec erlang(int shape, double rate);
  static InterarrivalSpec deterministic(double value);
  static InterarrivalSpec hyper_exponential(std::vector<double> weights,
                                            std::vector<double> rates);

  Kind kind() const { return kind_; }

  // E[e^{-sT}]. Throws "LST pole" outside the analyticity domain
  // Re(s) > -min_rate().
  Complex lst(Complex s) const;
  double lst_real(double s) const;

  // Closed-form continuation of the transform past the domain boundary
  // (meromorphic except at the rate poles); used by contour inversion.
  Complex lst_continued(Complex s) const;

  double mean() const;           // -phi'(0)
  double second_moment() const;  // phi''(0)

  bool has_density() const { return kind_ != Kind::Deterministic; }
  double density(double t) const;  // throws for Deterministic (point mass)
  double cdf(double t) const;

  double sample(Rng& rng) const;

  // Analyticity boundary; +infinity for Deterministic (entire).
  double min_rate() const;

  // Parameter access (variant-dependent; see kind()).
  double rate() const { return rates_[0]; }
  int shape() const { return shape_; }
  double deterministic_value() const { return det_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& rates() const { return rates_; }

 private:
  InterarrivalSpec() = default;

  Kind kind_ = Kind::Exponential;
  std::vector<double> rates_;
  std::vector<double> weights_;
  int shape_ = 1;
  double det_ = 0.0;
};

}  // namespace dualgain
