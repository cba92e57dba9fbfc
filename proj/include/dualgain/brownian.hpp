#pragma once

#include <memory>
#include <vector>

#include "dualgain/grid_function.hpp"
#include "dualgain/params.hpp"
#include "dualgain/scale.hpp"

namespace dualgain {

struct BrownianNumerics {
  int grid_points = 2049;  // chain grids per lattice interval
  int quad_nodes = 64;     // Gauss-Legendre nodes per interval (doubled to verify)

  void validate() const;
};

// First-passage transform families for the Brownian-perturbed proportional
// model on the level lattice: starting in (L_n, L_{n-1}),
//   r_{n,n-k}(x): discounted time of first reaching a lattice level, doing
//                 so by down-crossing L_{n-k};
//   omega_{n,n-k}(x): same but up-crossing L_{n-k} by the diffusion;
//   T_{n,0}(x): up-crossing L_0 = b by a jump;
//   vJ_n(x):    expected discounted overflow above b of that jump.
// Members are sums of convolution chains of scaled copies of W^{(q+lambda)}
// against a terminal kernel (xi, Omega, identity ramp, or integrated W);
// chains are materialized once per interval on shared grids and the signed
// coefficients follow the one-step recursion
//   c_next(chain with m factors) = -lambda (1+a)^{m-1} c,
// with the new W-coefficient fixed by the vanishing of the member at the
// interval's upper endpoint.
class BrownianFamilies {
 public:
  BrownianFamilies(const BrownianParams& params, BrownianNumerics numerics,
                   bool with_dividend_families);

  const BrownianParams& params() const { return params_; }
  const ScaleFamily& scale() const { return scale_; }

  // r_{n,n-k}(x), 0 <= k <= n-1, L_n < x <= L_{n-1}
  double r(int n, int k, double x) const;
  // omega_{n,n-k}(x), 1 <= k <= n
  double omega(int n, int k, double x) const;
  // T_{n,0}(x)
  double t_up(int n, double x) const;
  // vJ_n(x)
  double v_jump(int n, double x) const;

  // Signed chain coefficients (tests lock the k <= 2 base cases against the
  // hand-derived closed forms): index j is the coefficient of the chain of
  // j+1 scaled W factors; the last entry is the terminal-chain coefficient.
  std::vector<double> r_coefficients(int n, int k) const;
  std::vector<double> omega_coefficients(int n, int k) const;
  std::vector<double> t_coefficients(int n) const;
  std::vector<double> v_jump_coefficients(int n) const;

  bool has_dividend_families() const { return with_dividends_; }

 private:
  enum class Term { Xi, Omega, Q, One };

  struct Member {
    std::vector<double> c;  // c[j] multiplies C_j (j+1 W factors)
    double c_term = 0.0;
    int term_wcount = 0;  // # W factors inside the terminal chain
    Term kind = Term::Xi;
    int term_level = 0;  // lattice level of the xi/Omega terminal
  };

  struct Interval {
    double lower = 0.0;  // L_n
    double width = 0.0;  // Delta_n = L_{n-1} - L_n
    std::vector<GridFunction> c_chains;           // C_0..C_{n-1}
    std::vector<GridFunction> terminal_chains;    // indexed per member
  };

  Member step(const Member& src, int n_target, Term kind, int term_level);
  void finalize_c0(int n, Member& m, int terminal_id);
  int materialize_terminal(int n, const Member& m);
  double eval_member(int n, const Member& m, int terminal_id, double x) const;
  double terminal_fn(Term kind, int level, double u) const;
  std::vector<double> coefficients(const Member& m) const;

  BrownianParams params_;
  BrownianNumerics numerics_;
  bool with_dividends_;
  ScaleFamily scale_;
  std::vector<double> levels_;  // L_0..L_N

  std::vector<Interval> intervals_;                 // index 1..N
  std::vector<std::vector<Member>> r_members_;      // [n][k], k>=1
  std::vector<std::vector<int>> r_term_ids_;
  std::vector<std::vector<Member>> omega_members_;  // [n][k], k>=2
  std::vector<std::vector<int>> omega_term_ids_;
  std::vector<Member> t_members_;                   // [n]
  std::vector<int> t_term_ids_;
  std::vector<Member> vj_members_;                  // [n]
  std::vector<int> vj_term_ids_;
};

struct BrownianSolution {
  BrownianParams params;
  std::vector<double> rho;  // 0..N with rho_0 = 0, rho_N = 1
  std::vector<double> v;    // 0..N with v_N = 0 (empty unless solved)
  double cond_rho = 0.0;
  double cond_v = 0.0;
  // Relative drift of the solved vectors when the quadrature node count is
  // doubled; the assembly is accepted only if this is small.
  double quad_drift_rho = 0.0;
  double quad_drift_v = 0.0;
  std::shared_ptr<BrownianFamilies> families;
};

BrownianSolution solve_brownian(const BrownianParams& params,
                                BrownianNumerics numerics = {},
                                bool with_dividends = true);

double rho_eval_brownian(double x, const BrownianSolution& sol);
double v_eval_brownian(double x, const BrownianSolution& sol);

}  // namespace dualgain
