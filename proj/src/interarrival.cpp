#include "dualgain/interarrival.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dualgain {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

InterarrivalSpec InterarrivalSpec::exponential(double rate) {
  require(rate > 0.0, "exponential interarrival: rate must be > 0");
  InterarrivalSpec s;
  s.kind_ = Kind::Exponential;
  s.rates_ = {rate};
  return s;
}

InterarrivalSpec InterarrivalSpec::erlang(int shape, double rate) {
  require(shape >= 1, "erlang interarrival: shape must be >= 1");
  require(rate > 0.0, "erlang interarrival: rate must be > 0");
  InterarrivalSpec s;
  s.kind_ = Kind::Erlang;
  s.shape_ = shape;
  s.rates_ = {rate};
  return s;
}

InterarrivalSpec InterarrivalSpec::deterministic(double value) {
  require(value > 0.0, "deterministic interarrival: value must be > 0");
  InterarrivalSpec s;
  s.kind_ = Kind::Deterministic;
  s.det_ = value;
  return s;
}

InterarrivalSpec InterarrivalSpec::hyper_exponential(
    std::vector<double> weights, std::vector<double> rates) {
  require(!weights.empty() && weights.size() == rates.size(),
          "hyper-exponential interarrival: weights/rates size mismatch");
  double wsum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    require(weights[i] > 0.0, "hyper-exponential interarrival: weights must be > 0");
    require(rates[i] > 0.0, "hyper-exponential interarrival: rates must be > 0");
    wsum += weights[i];
  }
  require(std::abs(wsum - 1.0) <= 1e-12,
          "hyper-exponential interarrival: weights must sum to 1");
  InterarrivalSpec s;
  s.kind_ = Kind::HyperExponential;
  s.weights_ = std::move(weights);
  s.rates_ = std::move(rates);
  return s;
}

double InterarrivalSpec::min_rate() const {
  switch (kind_) {
    case Kind::Exponential:
    case Kind::Erlang:
      return rates_[0];
    case Kind::Deterministic:
      return std::numeric_limits<double>::infinity();
    case Kind::HyperExponential: {
      double m = rates_[0];
      for (double r : rates_) m = std::min(m, r);
      return m;
    }
  }
  return 0.0;
}

Complex InterarrivalSpec::lst(Complex s) const {
  if (kind_ != Kind::Deterministic && s.real() <= -min_rate())
    throw std::domain_error("LST pole");
  return lst_continued(s);
}

Complex InterarrivalSpec::lst_continued(Complex s) const {
  for (double r : rates_)
    if (std::abs(s + r) < 1e-14 * r) throw std::domain_error("LST pole");
  switch (kind_) {
    case Kind::Exponential:
      return rates_[0] / (rates_[0] + s);
    case Kind::Erlang:
      return std::pow(rates_[0] / (rates_[0] + s), shape_);
    case Kind::Deterministic:
      return std::exp(-s * det_);
    case Kind::HyperExponential: {
      Complex acc = 0.0;
      for (std::size_t i = 0; i < rates_.size(); ++i)
        acc += weights_[i] * rates_[i] / (rates_[i] + s);
      return acc;
    }
  }
  return 0.0;
}

double InterarrivalSpec::lst_real(double s) const { return lst(Complex(s, 0.0)).real(); }

double InterarrivalSpec::mean() const {
  switch (kind_) {
    case Kind::Exponential:
      return 1.0 / rates_[0];
    case Kind::Erlang:
      return shape_ / rates_[0];
    case Kind::Deterministic:
      return det_;
    case Kind::HyperExponential: {
      double m = 0.0;
      for (std::size_t i = 0; i < rates_.size(); ++i) m += weights_[i] / rates_[i];
      return m;
    }
  }
  return 0.0;
}

double InterarrivalSpec::second_moment() const {
  switch (kind_) {
    case Kind::Exponential:
      return 2.0 / (rates_[0] * rates_[0]);
    case Kind::Erlang:
      return shape_ * (shape_ + 1.0) / (rates_[0] * rates_[0]);
    case Kind::Deterministic:
      return det_ * det_;
    case Kind::HyperExponential: {
      double m = 0.0;
      for (std::size_t i = 0; i < rates_.size(); ++i)
        m += 2.0 * weights_[i] / (rates_[i] * rates_[i]);
      return m;
    }
  }
  return 0.0;
}

double InterarrivalSpec::density(double t) const {
  if (t < 0.0) return 0.0;
  switch (kind_) {
    case Kind::Exponential:
      return rates_[0] * std::exp(-rates_[0] * t);
    case Kind::Erlang: {
      const double nu = rates_[0];
      double logf = shape_ * std::log(nu) + (shape_ - 1) * std::log(t > 0 ? t : 1.0) -
                    nu * t - std::lgamma(shape_);
      if (shape_ > 1 && t == 0.0) return 0.0;
      return std::exp(logf);
    }
    case Kind::Deterministic:
      throw std::domain_error("deterministic interarrival has no density (point mass)");
    case Kind::HyperExponential: {
      double f = 0.0;
      for (std::size_t i = 0; i < rates_.size(); ++i)
        f += weights_[i] * rates_[i] * std::exp(-rates_[i] * t);
      return f;
    }
  }
  return 0.0;
}

double InterarrivalSpec::cdf(double t) const {
  if (t < 0.0) return 0.0;
  switch (kind_) {
    case Kind::Exponential:
      return -std::expm1(-rates_[0] * t);
    case Kind::Erlang: {
      // 1 - e^{-nu t} sum_{j<k} (nu t)^j / j!
      const double x = rates_[0] * t;
      double term = 1.0, sum = 1.0;
      for (int j = 1; j < shape_; ++j) {
        term *= x / j;
        sum += term;
      }
      return 1.0 - std::exp(-x) * sum;
    }
    case Kind::Deterministic:
      return t >= det_ ? 1.0 : 0.0;
    case Kind::HyperExponential: {
      double f = 0.0;
      for (std::size_t i = 0; i < rates_.size(); ++i)
        f += weights_[i] * -std::expm1(-rates_[i] * t);
      return f;
    }
  }
  return 0.0;
}

double InterarrivalSpec::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::Exponential:
      return rng.exponential(rates_[0]);
    case Kind::Erlang: {
      double acc = 0.0;
      for (int j = 0; j < shape_; ++j) acc += rng.exponential(rates_[0]);
      return acc;
    }
    case Kind::Deterministic:
      return det_;
    case Kind::HyperExponential: {
      const double u = rng.uniform();
      double cum = 0.0;
      for (std::size_t i = 0; i + 1 < rates_.size(); ++i) {
        cum += weights_[i];
        if (u < cum) return rng.exponential(rates_[i]);
      }
      return rng.exponential(rates_.back());
    }
  }
  return 0.0;
}

}  // namespace dualgain
