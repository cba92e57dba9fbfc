#include "dualgain/lattice.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "dualgain/linsys.hpp"

namespace dualgain {

namespace {

std::mutex g_fallback_mutex;

}  // namespace

ExpConvolutionBasis::ExpConvolutionBasis(double lambda, double q, double a,
                                         LatticeNumerics numerics)
    : lambda_(lambda), q_(q), a_(a), numerics_(numerics) {
  if (lambda <= 0.0 || q < 0.0 || a <= 0.0)
    throw std::invalid_argument("basis: need lambda > 0, q >= 0, a > 0");
  if (numerics_.n_switch < 1 || numerics_.grid_points < 65)
    throw std::invalid_argument("basis: bad numerics");
}

double ExpConvolutionBasis::rate(int i) const {
  return (lambda_ + q_) * std::pow(1.0 + a_, i);
}

double ExpConvolutionBasis::gamma_closed(int n, double x) const {
  double cancellation = 0.0;
  return gamma_closed_impl(n, x, &cancellation);
}

double ExpConvolutionBasis::gamma_closed_impl(int n, double x,
                                              double* cancellation) const {
  if (n == 0) {
    *cancellation = 0.0;
    return std::exp(-(lambda_ + q_) * x);
  }
  // Partial fractions of g_{(1+a)^{n-1}} * ... * g_1 * Gbar_{(1+a)^n}: the
  // kernel masses contribute (lambda/(lambda+q))^n and the convolved rates
  // contribute prod_{i<n} (1+a)^i = (1+a)^{n(n-1)/2}.
  double sum = 0.0, abs_sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    double denom = 1.0;
    const double ci = std::pow(1.0 + a_, i);
    for (int j = 0; j <= n; ++j) {
      if (j == i) continue;
      denom *= std::pow(1.0 + a_, j) - ci;
    }
    const double term = std::exp(-rate(i) * x) / denom;
    sum += term;
    abs_sum += std::abs(term);
  }
  const double scale =
      std::pow(lambda_ / (lambda_ + q_), n) * std::pow(1.0 + a_, 0.5 * n * (n - 1));
  *cancellation = scale * abs_sum;
  return scale * sum;
}

std::pair<double, double> ExpConvolutionBasis::unit_and_linear_closed(int n,
                                                                      double x) const {
  double cancellation = 0.0;
  return unit_and_linear_impl(n, x, &cancellation);
}

std::pair<double, double> ExpConvolutionBasis::unit_and_linear_impl(
    int n, double x, double* cancellation) const {
  // The n-fold kernel g_{(1+a)^{n-1}} * ... * g_1 is (lambda/(lambda+q))^n
  // times a hypoexponential density with rates r_0..r_{n-1}; integrating
  // the partial fractions against 1 and against (x - t) term by term.
  double one = 0.0, lin = 0.0, abs_one = 0.0;
  for (int i = 0; i < n; ++i) {
    double w = 1.0;
    const double ci = std::pow(1.0 + a_, i);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double cj = std::pow(1.0 + a_, j);
      w *= cj / (cj - ci);
    }
    const double ri = rate(i);
    const double e = -std::expm1(-ri * x);  // 1 - e^{-ri x}
    one += w * e;
    lin += w * (x - e / ri);
    abs_one += std::abs(w);
  }
  const double mass = std::pow(lambda_ / (lambda_ + q_), n);
  *cancellation = mass * abs_one;
  return {mass * one, mass * lin};
}

std::shared_ptr<const ExpConvolutionBasis::FallbackEntry> ExpConvolutionBasis::fallback(
    int n, double x) {
  std::lock_guard<std::mutex> lock(g_fallback_mutex);
  auto it = cache_.find(n);
  if (it != cache_.end() && x <= it->second->upper) return it->second;

  const double upper = std::max(x * 1.25, x + 1e-12);
  const std::size_t pts = static_cast<std::size_t>(numerics_.grid_points);
  const double lq = lambda_ + q_;

  // Iterated convolution of the g kernels, innermost scale first.
  GridFunction h = GridFunction::sample(upper, pts, [&](double t) {
    return lambda_ * std::exp(-lq * t);
  });
  for (int k = 2; k <= n; ++k) {
    const double c = std::pow(1.0 + a_, k - 1);
    h = h.convolve(GridFunction::sample(
        upper, pts, [&](double t) { return lambda_ * c * std::exp(-lq * c * t); }));
  }

  FallbackEntry e{upper, GridFunction(upper, pts), GridFunction(upper, pts),
                  GridFunction(upper, pts)};
  const double cg = std::pow(1.0 + a_, n);
  e.gamma = h.convolve(GridFunction::sample(
      upper, pts, [&](double t) { return std::exp(-lq * cg * t); }));
  e.unit = h.cumulative();
  // Q * h (x) = x * int h - int t h(t) dt.
  GridFunction th(upper, pts);
  for (std::size_t i = 0; i < pts; ++i)
    th.values()[i] = (i * th.step()) * h.values()[i];
  const GridFunction c2 = th.cumulative();
  e.linear = GridFunction(upper, pts);
  for (std::size_t i = 0; i < pts; ++i)
    e.linear.values()[i] = (i * e.linear.step()) * e.unit.values()[i] - c2.values()[i];
  auto entry = std::make_shared<const FallbackEntry>(std::move(e));
  cache_[n] = entry;
  return entry;
}

namespace {

// Accept a partial-fraction evaluation only when the alternating terms did
// not wipe out the result: the roundoff floor abs_sum * eps must stay well
// below |value| (or be absolutely negligible).
bool cancellation_ok(double value, double abs_sum) {
  const double noise = abs_sum * 2e-16;
  return noise <= 1e-14 || noise <= 1e-9 * std::abs(value);
}

}  // namespace

double ExpConvolutionBasis::gamma(int n, double x) {
  if (n < 0 || x < 0.0) throw std::domain_error("gamma: need n >= 0, x >= 0");
  if (n == 0) return std::exp(-(lambda_ + q_) * x);
  if (x == 0.0) return 0.0;
  if (n <= numerics_.n_switch) {
    double abs_sum = 0.0;
    const double v = gamma_closed_impl(n, x, &abs_sum);
    if (v >= -1e-12 && v <= 1.0 + 1e-9 && cancellation_ok(v, abs_sum))
      return std::max(v, 0.0);
  }
  return fallback(n, x)->gamma(x);
}

std::pair<double, double> ExpConvolutionBasis::unit_and_linear_conv(int n, double x) {
  if (n < 1 || x < 0.0) throw std::domain_error("convolutions: need n >= 1, x >= 0");
  if (x == 0.0) return {0.0, 0.0};
  if (n <= numerics_.n_switch) {
    double abs_sum = 0.0;
    auto [one, lin] = unit_and_linear_impl(n, x, &abs_sum);
    const double bound = std::pow(lambda_ / (lambda_ + q_), n);
    if (one >= -1e-12 && one <= bound * (1.0 + 1e-9) + 1e-12 && lin >= -1e-12 &&
        lin <= x * bound * (1.0 + 1e-9) + 1e-12 && cancellation_ok(one, abs_sum) &&
        cancellation_ok(lin, abs_sum * x))
      return {std::max(one, 0.0), std::max(lin, 0.0)};
  }
  const auto e = fallback(n, x);
  return {e->unit(x), e->linear(x)};
}

namespace {

struct Assembled {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  double cond = 0.0;
  Eigen::VectorXd z_rho;
  Eigen::VectorXd z_mu;
};

// (I - Gamma) with row n (1-based) holding gamma_{n+1-j}(L_n - L_{n+1}) at
// column j; the rho right-hand side carries the rho_N = 1 boundary and the
// mu side the omega constants.
Assembled assemble_exit(const LatticeParams& p, ExpConvolutionBasis& basis) {
  const int m = p.N - 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd z_rho = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd z_mu = Eigen::VectorXd::Zero(m);
  for (int n = 1; n <= m; ++n) {
    const double arg = p.gap(n + 1);
    for (int j = 0; j <= n; ++j) {
      const int col = n + 1 - j;
      if (col <= m) A(n - 1, col - 1) -= basis.gamma(j, arg);
    }
    if (n == m) z_rho(n - 1) = basis.gamma(0, arg);  // rho_N = 1
    z_mu(n - 1) = basis.unit_and_linear_conv(n + 1, arg).first;
  }
  Assembled out{Eigen::PartialPivLU<Eigen::MatrixXd>(A), 0.0, std::move(z_rho),
                std::move(z_mu)};
  const double rcond = out.lu.rcond();
  if (!(rcond > 1e-14))
    throw std::runtime_error("lattice exit system singular, condition number " +
                             std::to_string(rcond > 0 ? 1.0 / rcond : 0.0));
  out.cond = 1.0 / rcond;
  return out;
}

}  // namespace

LatticeSolution solve_exit(const LatticeParams& params, LatticeNumerics numerics) {
  params.validate();
  LatticeSolution sol;
  sol.params = params;
  sol.basis = std::make_shared<ExpConvolutionBasis>(params.lambda, params.q, params.a,
                                                    numerics);
  const int N = params.N;
  auto sys = assemble_exit(params, *sol.basis);
  sol.cond_exit = sys.cond;

  const Eigen::VectorXd rho = sys.lu.solve(sys.z_rho);
  const Eigen::VectorXd mu = sys.lu.solve(sys.z_mu);

  sol.rho.assign(N + 1, 0.0);
  for (int n = 1; n < N; ++n) sol.rho[n] = rho(n - 1);
  sol.rho[N] = 1.0;

  sol.mu.assign(N + 1, 0.0);
  sol.mu[0] = 1.0;  // boundary value: starting at b counts as up-crossed
  for (int n = 1; n < N; ++n) sol.mu[n] = mu(n - 1);
  sol.mu[N] = 0.0;
  return sol;
}

void solve_dividends(LatticeSolution& sol, LatticeNumerics numerics) {
  const LatticeParams& p = sol.params;
  if (!sol.basis)
    sol.basis = std::make_shared<ExpConvolutionBasis>(p.lambda, p.q, p.a, numerics);
  ExpConvolutionBasis& basis = *sol.basis;
  const int N = p.N;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(N, N);
  Eigen::VectorXd rhs(N);
  for (int n = 0; n < N; ++n) {
    const double arg = p.gap(n + 1);
    auto [omega, qconv] = basis.unit_and_linear_conv(n + 1, arg);
    A(n, 0) -= omega;
    for (int j = 0; j <= n; ++j) {
      const int col = n + 1 - j;
      if (col <= N - 1) A(n, col) -= basis.gamma(j, arg);
    }
    rhs(n) = std::pow(1.0 + p.a, n + 1) * qconv;
  }
  auto [v, cond] = solve_dense(A, rhs, "lattice dividend system");
  sol.cond_dividend = cond;
  sol.v.assign(N + 1, 0.0);
  for (int n = 0; n < N; ++n) sol.v[n] = v(n);
  sol.v[N] = 0.0;
}

namespace {

// Interval index n with L_n < x <= L_{n-1}; exact lattice points report
// back through `lattice_index` so callers can return stored values.
int locate(const LatticeParams& p, double x, int* lattice_index) {
  const double t = std::log(p.b / x) / std::log1p(p.a);
  const long k = std::lround(t);
  *lattice_index = -1;
  if (k >= 0 && k <= p.N && std::abs(t - static_cast<double>(k)) < 1e-9) {
    *lattice_index = static_cast<int>(k);
    return std::max(1, static_cast<int>(k));
  }
  const int n = static_cast<int>(std::ceil(t));
  return std::min(std::max(n, 1), p.N);
}

}  // namespace

double rho_eval(double x, const LatticeSolution& sol, LatticeNumerics numerics) {
  const LatticeParams& p = sol.params;
  if (!(x > p.level(p.N) && x <= p.b))
    throw std::domain_error("rho_eval: x must lie in (L_N, b]");
  int lattice = -1;
  const int n = locate(p, x, &lattice);
  if (lattice >= 1) return sol.rho[lattice];
  ExpConvolutionBasis local(p.lambda, p.q, p.a, numerics);
  ExpConvolutionBasis& basis = sol.basis ? *sol.basis : local;
  const double u = x - p.level(n);
  double acc = 0.0;
  for (int j = 0; j <= n - 1; ++j) acc += basis.gamma(j, u) * sol.rho[n - j];
  return acc;
}

double mu_eval(double x, const LatticeSolution& sol, LatticeNumerics numerics) {
  const LatticeParams& p = sol.params;
  if (!(x > p.level(p.N) && x <= p.b))
    throw std::domain_error("mu_eval: x must lie in (L_N, b]");
  int lattice = -1;
  const int n = locate(p, x, &lattice);
  if (lattice >= 1) return sol.mu[lattice];
  ExpConvolutionBasis local(p.lambda, p.q, p.a, numerics);
  ExpConvolutionBasis& basis = sol.basis ? *sol.basis : local;
  const double u = x - p.level(n);
  double acc = basis.unit_and_linear_conv(n, u).first;
  for (int j = 0; j <= n - 1; ++j) acc += basis.gamma(j, u) * sol.mu[n - j];
  return acc;
}

double v_eval(double x, const LatticeSolution& sol, LatticeNumerics numerics) {
  const LatticeParams& p = sol.params;
  if (sol.v.empty()) throw std::logic_error("v_eval: dividends not solved");
  if (x > p.b) return sol.v[0] + x - p.b;  // all overflow above b paid out
  if (!(x > p.level(p.N)))
    throw std::domain_error("v_eval: x must be > L_N");
  int lattice = -1;
  const int n = locate(p, x, &lattice);
  if (lattice >= 0) return sol.v[lattice];
  ExpConvolutionBasis local(p.lambda, p.q, p.a, numerics);
  ExpConvolutionBasis& basis = sol.basis ? *sol.basis : local;
  const double u = x - p.level(n);
  auto [one, lin] = basis.unit_and_linear_conv(n, u);
  double acc = one * sol.v[0] + std::pow(1.0 + p.a, n) * lin;
  for (int j = 0; j <= n - 1; ++j) acc += basis.gamma(j, u) * sol.v[n - j];
  return acc;
}

}  // namespace dualgain
