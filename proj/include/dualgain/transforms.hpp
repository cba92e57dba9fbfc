#pragma once

#include <map>
#include <mutex>
#include <utility>

#include "dualgain/params.hpp"

namespace dualgain {

// Truncation policy for the scaled-argument series: stop once the running
// product of |J| factors times a uniform bound on |H| at the remaining
// (shrinking) arguments falls below tail_tolerance.
struct SeriesControl {
  double tail_tolerance = 1e-12;
  int max_terms = 10000;
  // Pole-proximity guard radius; <= 0 selects 1e-8 * mu * (1+a).
  double singularity_guard = 0.0;

  void validate() const;
};

// Diagnostics of one series evaluation; tail_ratio is the largest |J|
// observed past burn-in and must settle near 1/(1+a).
struct SeriesDiag {
  int terms = 0;
  bool converged = false;
  double tail_ratio = 0.0;
  bool guarded = false;  // evaluated via the removable-singularity offset
};

// Root of delta - s - (1-p) delta phi(s) = 0 in the right half-plane.
// Real bracketing + bisection; p = 1 degenerates to s1 = delta.
double rouche_root(double delta, double p, const InterarrivalSpec& interarrival);

// Laplace transforms of the ruin probability and of the ruin time for the
// dual model with proportional gains. Immutable after construction; the
// s-independent constants rho(mu), rho(delta) and the root s1 are solved
// once up front.
class RuinTransform {
 public:
  explicit RuinTransform(DualModelParams params, SeriesControl control = {});

  const DualModelParams& params() const { return params_; }
  const SeriesControl& control() const { return control_; }

  // rho(s) = int_0^inf e^{-sx} P_x(ruin) dx, Re(s) > 0.
  Complex ruin_lt(Complex s) const;
  Complex ruin_lt(Complex s, SeriesDiag* diag) const;

  // Mixture-model transform; coincides with ruin_lt when mixture_p = 1.
  Complex generalized_ruin_lt(Complex s) const;
  Complex generalized_ruin_lt(Complex s, SeriesDiag* diag) const;

  // tau(s, alpha) = int_0^inf e^{-sx} E[e^{-alpha tau_x}] dx.
  Complex ruin_time_lt(Complex s, double alpha) const;
  Complex ruin_time_lt(Complex s, double alpha, SeriesDiag* diag) const;

  // H and J of the base model at s (uses the cached rho(mu)).
  std::pair<Complex, Complex> hj(Complex s) const;

  double rho_at_mu() const { return rho_mu_; }
  double rho_at_delta() const;
  double rouche_s1() const;
  double mixture_condition() const { return mixture_cond_; }

  // tau(mu, alpha); cached per alpha.
  double tau_at_mu(double alpha) const;

  // Analytic continuation of the series past Re(s) = 0 for contour
  // inversion methods; convergence is checked at runtime, not guaranteed.
  Complex ruin_lt_continued(Complex s) const;
  Complex generalized_ruin_lt_continued(Complex s) const;
  Complex ruin_time_lt_continued(Complex s, double alpha) const;

 private:
  enum class Route { Series, PureProportional, ClassicalA0 };

  Complex series_base(Complex s, SeriesDiag* diag) const;
  Complex series_mixture(Complex s, SeriesDiag* diag) const;
  Complex series_time(Complex s, double alpha, SeriesDiag* diag) const;
  Complex guard_or_eval(Complex s, SeriesDiag* diag,
                        Complex (RuinTransform::*eval)(Complex, SeriesDiag*) const) const;
  double pole_distance(Complex s) const;
  void solve_mixture_unknowns();

  DualModelParams params_;
  SeriesControl control_;
  Route route_ = Route::Series;
  double eps_sing_ = 0.0;
  double rho_mu_ = 0.0;
  double rho_delta_ = 0.0;
  double rho_s1_scaled_ = 0.0;
  double s1_ = 0.0;
  double mixture_cond_ = 0.0;
  double classical_zeta_ = 0.0;  // a = 0, Poisson arrivals: rho(s) = 1/(s+zeta)

  mutable std::mutex tau_mu_mutex_;
  mutable std::map<double, double> tau_mu_cache_;
};

// Convenience wrappers matching the operation-level surface.
std::pair<Complex, Complex> hj(Complex s, double rho_mu, const DualModelParams& params);
double rho_at_mu(const DualModelParams& params, const SeriesControl& control = {});

}  // namespace dualgain
