#include "dualgain/grid_function.hpp"

#include <cmath>
#include <stdexcept>

#include "dualgain/kernels.hpp"

namespace dualgain {

GridFunction::GridFunction(double upper, std::size_t points)
    : upper_(upper), step_(upper / static_cast<double>(points - 1)), values_(points, 0.0) {
  if (upper <= 0.0) throw std::invalid_argument("grid: upper must be > 0");
  if (points < 9) throw std::invalid_argument("grid: need at least 9 points");
}

GridFunction GridFunction::sample(double upper, std::size_t points,
                                  const std::function<double(double)>& f) {
  GridFunction g(upper, points);
  for (std::size_t i = 0; i < points; ++i) g.values_[i] = f(i * g.step_);
  return g;
}

double GridFunction::operator()(double x) const {
  if (x < 0.0) return 0.0;
  const double u = x / step_;
  if (u > static_cast<double>(values_.size() - 1) + 1e-9)
    throw std::domain_error("grid: evaluation beyond the sampled domain");
  const std::size_t i = std::min(static_cast<std::size_t>(u), values_.size() - 2);
  const double w = u - static_cast<double>(i);
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

GridFunction GridFunction::convolve(const GridFunction& g) const {
  if (g.values_.size() != values_.size() || std::abs(g.upper_ - upper_) > 1e-12 * upper_)
    throw std::invalid_argument("grid: convolution requires identical grids");
  GridFunction out(upper_, values_.size());
  kern::conv_trapezoid(values_.data(), g.values_.data(), values_.size(), step_,
                       out.values_.data());
  return out;
}

GridFunction GridFunction::cumulative() const {
  GridFunction out(upper_, values_.size());
  double acc = 0.0;
  out.values_[0] = 0.0;
  for (std::size_t i = 1; i < values_.size(); ++i) {
    acc += 0.5 * (values_[i - 1] + values_[i]) * step_;
    out.values_[i] = acc;
  }
  return out;
}

GridFunction GridFunction::coarsened() const {
  const std::size_t n = (values_.size() - 1) / 2 + 1;
  GridFunction out(upper_, n);
  for (std::size_t i = 0; i < n; ++i) out.values_[i] = values_[2 * i];
  return out;
}

}  // namespace dualgain
