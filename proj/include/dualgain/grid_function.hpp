#pragma once

#include <functional>
#include <vector>

namespace dualgain {

// Uniformly sampled function on [0, upper] with linear interpolation and
// trapezoid-rule convolution (O(h^2), checked by Richardson halving in the
// tests). Numerical carrier for convolution chains.
class GridFunction {
 public:
  GridFunction(double upper, std::size_t points);
  static GridFunction sample(double upper, std::size_t points,
                             const std::function<double(double)>& f);

  double upper() const { return upper_; }
  double step() const { return step_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  // Linear interpolation; exact at grid nodes. x < 0 evaluates to 0
  // (convolution semantics); x beyond the domain is a domain error.
  double operator()(double x) const;

  // Trapezoid convolution with a function on the identical grid.
  GridFunction convolve(const GridFunction& g) const;

  // Antiderivative on the same grid (trapezoid).
  GridFunction cumulative() const;

  // Resampled copy with half the resolution (Richardson checks).
  GridFunction coarsened() const;

 private:
  double upper_;
  double step_;
  std::vector<double> values_;
};

}  // namespace dualgain
