#pragma once

namespace dualgain {

// Scale functions of the linear Brownian motion X(t) = eta t + sigma B(t)
// at rate q_eff (the perturbed-model formulas use q_eff = q + lambda
// throughout). With
//   D = sqrt(eta^2 + 2 q_eff sigma^2),
//   omega_plus = (D - eta)/sigma^2,  omega_minus = (D + eta)/sigma^2,
// the first scale function is W(x) = (e^{omega_plus x} - e^{-omega_minus x})/D,
// the unique right-continuous function vanishing on (-inf,0) with
// int e^{-theta x} W(x) dx = 1/(psi(theta) - q_eff), and
// Z(x) = 1 + q_eff int_0^x W. Exit identities are evaluated in factored
// forms with all exponentials nonpositive, so they stay accurate when
// omega_plus x is large (small sigma / strong drift).
class ScaleFamily {
 public:
  ScaleFamily(double eta, double sigma, double q_eff);

  double eta() const { return eta_; }
  double sigma() const { return sigma_; }
  double q_eff() const { return q_; }
  double omega_plus() const { return wp_; }
  double omega_minus() const { return wm_; }

  double psi(double theta) const;  // eta theta + sigma^2 theta^2 / 2
  double phi_inverse() const;      // right inverse of psi at q_eff

  double w(double x) const;        // W^{(q_eff)}; 0 for x < 0
  double w_prime(double x) const;
  double z(double x) const;        // Z^{(q_eff)}
  double wbar(double x) const;     // int_0^x W

  // E_x[e^{-q u_beta} 1{up before down}] = W(x-alpha)/W(beta-alpha),
  // parameterized by u = x - alpha and span = beta - alpha.
  double exit_up(double u, double span) const;

  // E_x[e^{-q d_alpha} 1{down before up}] = Z(u) - W(u) Z(span)/W(span).
  double exit_down(double u, double span) const;

  // Resolvent density of the process killed at leaving (alpha, beta).
  double resolvent(double x, double y, double alpha, double beta) const;

  // Resolvent density of the process reflected at b, killed at passing alpha.
  double reflected_resolvent(double x, double y, double alpha, double b) const;

  // Expected discounted reflected-boundary dividends until d_alpha ^ E_clock:
  // W(b-alpha)/W'(b-alpha).
  double barrier_dividend_rate(double b, double alpha) const;

  // E_x[e^{-q d_alpha} 1{before the clock}] for the reflected process.
  double reflected_exit(double x, double alpha, double b) const;

 private:
  double eta_, sigma_, q_;
  double disc_, d_, wp_, wm_, gamma_;
};

}  // namespace dualgain
