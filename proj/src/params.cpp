#include "dualgain/params.hpp"

#include <cmath>
#include <stdexcept>

namespace dualgain {

void DualModelParams::validate() const {
  if (a < 0.0) throw std::invalid_argument("model: a must be >= 0");
  if (mu && *mu <= 0.0) throw std::invalid_argument("model: mu must be > 0");
  if (mixture_p < 0.0 || mixture_p > 1.0)
    throw std::invalid_argument("model: mixture_p must be in [0,1]");
  if (mixture_p < 1.0) {
    if (!delta || *delta <= 0.0)
      throw std::invalid_argument("model: delta > 0 required when mixture_p < 1");
    if (!mu)
      throw std::invalid_argument("model: mixture requires an additive gain rate mu");
  } else if (delta) {
    throw std::invalid_argument("model: delta given but mixture_p = 1 (delta unused)");
  }
}

double DualModelParams::mean_additive_jump() const {
  const double mc = mu ? 1.0 / *mu : 0.0;
  if (mixture_p < 1.0) return mixture_p * mc + (1.0 - mixture_p) / *delta;
  return mc;
}

void LatticeParams::validate() const {
  if (b <= 0.0) throw std::invalid_argument("lattice: b must be > 0");
  if (N < 2) throw std::invalid_argument("lattice: N must be >= 2");
  if (N > 512) throw std::invalid_argument("lattice: N must be <= 512");
  if (lambda <= 0.0) throw std::invalid_argument("lattice: lambda must be > 0");
  if (q < 0.0) throw std::invalid_argument("lattice: q must be >= 0");
  if (a <= 0.0) throw std::invalid_argument("lattice requires a > 0");
}

double LatticeParams::level(int n) const { return b / std::pow(1.0 + a, n); }

double LatticeParams::gap(int n) const { return level(n - 1) - level(n); }

void BrownianParams::validate() const {
  if (sigma <= 0.0) throw std::invalid_argument("brownian: sigma must be > 0");
  if (lambda <= 0.0) throw std::invalid_argument("brownian: lambda must be > 0");
  if (q < 0.0) throw std::invalid_argument("brownian: q must be >= 0");
  lattice.validate();
}

DriftClass classify_drift(const DualModelParams& params) {
  params.validate();
  if (params.a > 0.0) return DriftClass::Transient;
  const double up = params.mean_additive_jump();
  const double down = params.interarrival.mean();
  // a == 0: certain ruin iff the walk drifts down, i.e. E[T] >= E[jump].
  const double scale = std::max(up, down);
  if (std::abs(down - up) <= 1e-12 * scale) return DriftClass::Critical;
  return down > up ? DriftClass::CertainRuin : DriftClass::Transient;
}

const char* to_string(DriftClass c) {
  switch (c) {
    case DriftClass::Transient:
      return "Transient";
    case DriftClass::CertainRuin:
      return "CertainRuin";
    case DriftClass::Critical:
      return "Critical";
  }
  return "?";
}

}  // namespace dualgain
