#pragma once

#include <functional>

#include "dualgain/transforms.hpp"

namespace dualgain {

// Numerical inversion of a one-dimensional Laplace transform.
struct InversionControl {
  enum class Method { EulerSummation, Talbot };

  Method method = Method::EulerSummation;
  int terms = 51;               // 2M+1 transform evaluations, M = 25
  double contour_shift = 18.4;  // Euler summation A parameter
  double precision_target = 1e-7;

  void validate() const;
};

struct InversionResult {
  double value = 0.0;
  double error_estimate = 0.0;
  // Set when the Euler/Talbot cross check disagreed by more than
  // 10 x precision_target.
  bool method_warning = false;
};

using TransformFn = std::function<Complex(Complex)>;

// f(x) from its transform; the evaluator must be analytic for Re(s) > 0
// (Talbot additionally samples the continuation left of the axis).
InversionResult invert(const TransformFn& transform, double x,
                       const InversionControl& control = {});

// Runs both methods and flags disagreement.
InversionResult invert_cross_checked(const TransformFn& transform, double x,
                                     const InversionControl& control = {});

struct RuinProbability {
  double value = 0.0;  // clamped to [0,1]
  double raw = 0.0;
  bool clamped_out_of_range = false;  // raw left [-tol, 1+tol]
  bool method_warning = false;
};

// R(x) by inverting the ruin transform; clamp-and-flag policy so parameter
// sweeps complete while anomalies stay visible.
RuinProbability ruin_probability(double x, const RuinTransform& rt,
                                 const InversionControl& control = {},
                                 bool cross_check = false);

// E[e^{-alpha tau_x}] for fixed alpha by inverting tau(., alpha).
RuinProbability ruin_time_value(double x, double alpha, const RuinTransform& rt,
                                const InversionControl& control = {},
                                bool cross_check = false);

}  // namespace dualgain
