#pragma once

#include <map>
#include <memory>
#include <vector>

#include "dualgain/grid_function.hpp"
#include "dualgain/params.hpp"

namespace dualgain {

// Numerics knobs for the lattice solvers.
struct LatticeNumerics {
  // Switch from the partial-fraction closed forms to iterated grid
  // convolution: the alternating products ((1+a)^j - (1+a)^i) cancel
  // catastrophically for deep chains or nearly-confluent rates.
  int n_switch = 15;
  int grid_points = 2049;
};

// Convolutions of the defective exponential kernels
//   Gbar_c(t) = e^{-(lambda+q)ct},  g_c(t) = lambda c e^{-(lambda+q)ct}
// at the geometric scales c = (1+a)^i.
class ExpConvolutionBasis {
 public:
  ExpConvolutionBasis(double lambda, double q, double a,
                      LatticeNumerics numerics = {});

  double rate(int i) const;  // (lambda+q)(1+a)^i

  // gamma_0(x) = Gbar_1(x); gamma_n = Gbar_{(1+a)^n} * g_{(1+a)^{n-1}} * ... * g_1.
  double gamma(int n, double x);

  // 1 * g_{(1+a)^{n-1}} * ... * g_1 (x) and Q * g_... (x) with Q(t) = t.
  std::pair<double, double> unit_and_linear_conv(int n, double x);

  // Closed forms without the fallback, exposed for the oracle tests.
  double gamma_closed(int n, double x) const;
  std::pair<double, double> unit_and_linear_closed(int n, double x) const;

 private:
  double gamma_closed_impl(int n, double x, double* cancellation) const;
  std::pair<double, double> unit_and_linear_impl(int n, double x,
                                                 double* cancellation) const;

 public:

 private:
  struct FallbackEntry {
    double upper = 0.0;
    GridFunction gamma{1.0, 9};
    GridFunction unit{1.0, 9};
    GridFunction linear{1.0, 9};
  };

  std::shared_ptr<const FallbackEntry> fallback(int n, double x);

  double lambda_, q_, a_;
  LatticeNumerics numerics_;
  std::map<int, std::shared_ptr<const FallbackEntry>> cache_;
};

// Solved two-sided exit transforms and barrier-dividend values on the level
// lattice L_n = b/(1+a)^n. Boundary entries are imposed, not solved:
// rho_N = 1, mu_0 = 1 (and mu_N = 0), v_N = 0.
struct LatticeSolution {
  LatticeParams params;
  std::vector<double> rho;  // index 1..N valid
  std::vector<double> mu;   // index 0..N valid
  std::vector<double> v;    // index 0..N valid
  double cond_exit = 0.0;   // shared (I - Gamma) factor for rho and mu
  double cond_dividend = 0.0;
  std::shared_ptr<ExpConvolutionBasis> basis;  // reused by the evaluators
};

// Solves the (N-1)x(N-1) exit systems for rho_n and mu_n.
LatticeSolution solve_exit(const LatticeParams& params, LatticeNumerics numerics = {});

// Adds the dividend values v_0..v_N to a solution (NxN system).
void solve_dividends(LatticeSolution& sol, LatticeNumerics numerics = {});

// Pointwise evaluation for x in (L_N, b]; x above b uses v(x) = v_0 + x - b
// (v_eval only). Lattice points return the solved values exactly.
double rho_eval(double x, const LatticeSolution& sol, LatticeNumerics numerics = {});
double mu_eval(double x, const LatticeSolution& sol, LatticeNumerics numerics = {});
double v_eval(double x, const LatticeSolution& sol, LatticeNumerics numerics = {});

}  // namespace dualgain
