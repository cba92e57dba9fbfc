#include "dualgain/brownian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dualgain/linsys.hpp"

namespace dualgain {

void BrownianNumerics::validate() const {
  if (grid_points < 65) throw std::invalid_argument("brownian: grid_points too small");
  if (quad_nodes < 8) throw std::invalid_argument("brownian: quad_nodes too small");
}

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] (Newton on the Legendre
// polynomial; standard symmetric construction).
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

struct Quad {
  std::vector<double> x, w;
  Quad(int n, double lo, double hi) {
    gauss_legendre(n, x, w);
    const double c = 0.5 * (hi - lo), m = 0.5 * (hi + lo);
    for (int i = 0; i < n; ++i) {
      x[i] = m + c * x[i];
      w[i] *= c;
    }
  }
};

}  // namespace

BrownianFamilies::BrownianFamilies(const BrownianParams& params,
                                   BrownianNumerics numerics,
                                   bool with_dividend_families)
    : params_(params),
      numerics_(numerics),
      with_dividends_(with_dividend_families),
      scale_(params.eta, params.sigma, params.q + params.lambda) {
  params_.validate();
  numerics_.validate();
  const int N = params_.lattice.N;
  levels_.resize(N + 1);
  for (int n = 0; n <= N; ++n) levels_[n] = params_.lattice.level(n);

  // Chain values carry a factor e^{omega_plus * gap} that the assembled
  // transforms cancel away; every unit costs ~0.43 decimal digits.
  const double top_gap = levels_[0] - levels_[1];
  if (scale_.omega_plus() * top_gap > 25.0)
    throw std::invalid_argument(
        "brownian: omega_plus * (L_0 - L_1) too large for the chain "
        "representation; reduce the lattice gaps or increase sigma");

  const std::size_t pts = static_cast<std::size_t>(numerics_.grid_points);
  const double one_plus_a = 1.0 + params_.lattice.a;

  intervals_.resize(N + 1);
  for (int n = 1; n <= N; ++n) {
    Interval& iv = intervals_[n];
    iv.lower = levels_[n];
    iv.width = levels_[n - 1] - levels_[n];
    iv.c_chains.reserve(n);
    iv.c_chains.push_back(GridFunction::sample(
        iv.width, pts, [&](double t) { return scale_.w(t); }));
    for (int j = 1; j <= n - 1; ++j) {
      const double cj = std::pow(one_plus_a, j);
      GridFunction wj = GridFunction::sample(
          iv.width, pts, [&](double t) { return scale_.w(cj * t); });
      iv.c_chains.push_back(iv.c_chains[j - 1].convolve(wj));
    }
  }

  r_members_.assign(N + 1, {});
  r_term_ids_.assign(N + 1, {});
  omega_members_.assign(N + 1, {});
  omega_term_ids_.assign(N + 1, {});
  for (int n = 0; n <= N; ++n) {
    r_members_[n].assign(std::max(0, n), Member{});
    r_term_ids_[n].assign(std::max(0, n), -1);
    omega_members_[n].assign(n + 1, Member{});
    omega_term_ids_[n].assign(n + 1, -1);
  }

  // r-family: fixed destination level m, lengthening chains upward.
  for (int m = 1; m <= N - 1; ++m) {
    Member src;
    src.c_term = 1.0;
    src.term_wcount = 0;
    src.kind = Term::Xi;
    src.term_level = m;
    for (int k = 1; m + k <= N; ++k) {
      Member dst = step(src, m + k, Term::Xi, m);
      r_term_ids_[m + k][k - 1] = materialize_terminal(m + k, dst);
      finalize_c0(m + k, dst, r_term_ids_[m + k][k - 1]);
      r_members_[m + k][k - 1] = dst;
      src = dst;
    }
  }

  // omega-family: k = 1 is the plain two-sided up-exit; chains start at k = 2.
  for (int m = 0; m <= N - 1; ++m) {
    Member src;
    src.c_term = 1.0;
    src.term_wcount = 0;
    src.kind = Term::Omega;
    src.term_level = m;
    for (int k = 2; m + k <= N; ++k) {
      Member dst = step(src, m + k, Term::Omega, m);
      omega_term_ids_[m + k][k] = materialize_terminal(m + k, dst);
      finalize_c0(m + k, dst, omega_term_ids_[m + k][k]);
      omega_members_[m + k][k] = dst;
      src = dst;
    }
  }

  if (with_dividends_) {
    t_members_.assign(N + 1, Member{});
    t_term_ids_.assign(N + 1, -1);
    vj_members_.assign(N + 1, Member{});
    vj_term_ids_.assign(N + 1, -1);

    Member tsrc;  // constant-1 kernel: the step turns it into Wbar chains
    tsrc.c_term = 1.0;
    tsrc.term_wcount = 0;
    tsrc.kind = Term::One;
    Member qsrc;
    qsrc.c_term = 1.0;
    qsrc.term_wcount = 0;
    qsrc.kind = Term::Q;
    for (int n = 1; n <= N; ++n) {
      Member t = step(tsrc, n, Term::One, 0);
      t_term_ids_[n] = materialize_terminal(n, t);
      finalize_c0(n, t, t_term_ids_[n]);
      t_members_[n] = t;
      tsrc = t;

      Member vj = step(qsrc, n, Term::Q, 0);
      vj_term_ids_[n] = materialize_terminal(n, vj);
      finalize_c0(n, vj, vj_term_ids_[n]);
      vj_members_[n] = vj;
      qsrc = vj;
    }
  }
}

// One resolvent-composition step from interval n-1 into interval n:
// every chain gains a leading W factor; a chain with m scaled factors
// contributes -(lambda)(1+a)^{m-1} times its coefficient.
BrownianFamilies::Member BrownianFamilies::step(const Member& src, int n_target,
                                                Term kind, int term_level) {
  const double lambda = params_.lambda;
  const double one_plus_a = 1.0 + params_.lattice.a;
  Member dst;
  dst.kind = kind;
  dst.term_level = term_level;
  dst.term_wcount = src.term_wcount + 1;
  dst.c.assign(src.c.size() + 1, 0.0);
  for (std::size_t j = 0; j < src.c.size(); ++j)
    dst.c[j + 1] = -lambda * std::pow(one_plus_a, static_cast<double>(j)) * src.c[j];
  dst.c_term = -lambda * std::pow(one_plus_a, src.term_wcount) * src.c_term;
  (void)n_target;
  return dst;
}

void BrownianFamilies::finalize_c0(int n, Member& m, int terminal_id) {
  const Interval& iv = intervals_[n];
  const double width = iv.width;
  double acc = 0.0;
  for (std::size_t j = 1; j < m.c.size(); ++j)
    acc += m.c[j] * iv.c_chains[j].values().back();
  acc += m.c_term * iv.terminal_chains[terminal_id].values().back();
  m.c[0] = -acc / scale_.w(width);
}

double BrownianFamilies::terminal_fn(Term kind, int level, double u) const {
  switch (kind) {
    case Term::Xi:
      return scale_.exit_down(u, levels_[level - 1] - levels_[level]);
    case Term::Omega:
      return scale_.exit_up(u, levels_[level] - levels_[level + 1]);
    case Term::Q:
      return u;
    case Term::One:
      return 1.0;
  }
  return 0.0;
}

int BrownianFamilies::materialize_terminal(int n, const Member& m) {
  Interval& iv = intervals_[n];
  const std::size_t pts = static_cast<std::size_t>(numerics_.grid_points);
  const double scale_arg = std::pow(1.0 + params_.lattice.a, m.term_wcount);
  const int w = m.term_wcount;
  GridFunction term(iv.width, pts);
  if (m.kind == Term::One) {
    // chain * 1 = running integral of the chain.
    term = iv.c_chains[w - 1].cumulative();
  } else if (m.kind == Term::Q) {
    // chain * (scaled ramp): c x int chain - c int s chain(s) ds.
    const GridFunction c1 = iv.c_chains[w - 1].cumulative();
    GridFunction sh(iv.width, pts);
    for (std::size_t i = 0; i < pts; ++i)
      sh.values()[i] = (i * sh.step()) * iv.c_chains[w - 1].values()[i];
    const GridFunction c2 = sh.cumulative();
    for (std::size_t i = 0; i < pts; ++i)
      term.values()[i] =
          scale_arg * ((i * term.step()) * c1.values()[i] - c2.values()[i]);
  } else {
    GridFunction t0 = GridFunction::sample(iv.width, pts, [&](double t) {
      return terminal_fn(m.kind, m.term_level, scale_arg * t);
    });
    term = iv.c_chains[w - 1].convolve(t0);
  }
  iv.terminal_chains.push_back(std::move(term));
  return static_cast<int>(iv.terminal_chains.size()) - 1;
}

double BrownianFamilies::eval_member(int n, const Member& m, int terminal_id,
                                     double x) const {
  const Interval& iv = intervals_[n];
  double u = x - iv.lower;
  if (u <= 0.0) return 0.0;
  if (u > iv.width) u = iv.width;
  double acc = 0.0;
  for (std::size_t j = 0; j < m.c.size(); ++j) acc += m.c[j] * iv.c_chains[j](u);
  acc += m.c_term * iv.terminal_chains[terminal_id](u);
  return acc;
}

double BrownianFamilies::r(int n, int k, double x) const {
  if (n < 1 || n > params_.lattice.N || k < 0 || k > n - 1)
    throw std::domain_error("r: need 1 <= n <= N, 0 <= k <= n-1");
  if (k == 0) {
    const Interval& iv = intervals_[n];
    return scale_.exit_down(x - iv.lower, iv.width);
  }
  return eval_member(n, r_members_[n][k - 1], r_term_ids_[n][k - 1], x);
}

double BrownianFamilies::omega(int n, int k, double x) const {
  if (n < 1 || n > params_.lattice.N || k < 1 || k > n)
    throw std::domain_error("omega: need 1 <= n <= N, 1 <= k <= n");
  if (k == 1) {
    const Interval& iv = intervals_[n];
    return scale_.exit_up(x - iv.lower, iv.width);
  }
  return eval_member(n, omega_members_[n][k], omega_term_ids_[n][k], x);
}

double BrownianFamilies::t_up(int n, double x) const {
  if (!with_dividends_) throw std::logic_error("t_up: dividend families not built");
  return eval_member(n, t_members_[n], t_term_ids_[n], x);
}

double BrownianFamilies::v_jump(int n, double x) const {
  if (!with_dividends_) throw std::logic_error("v_jump: dividend families not built");
  return eval_member(n, vj_members_[n], vj_term_ids_[n], x);
}

std::vector<double> BrownianFamilies::coefficients(const Member& m) const {
  std::vector<double> out = m.c;
  out.push_back(m.c_term);
  return out;
}

std::vector<double> BrownianFamilies::r_coefficients(int n, int k) const {
  return coefficients(r_members_[n].at(k - 1));
}
std::vector<double> BrownianFamilies::omega_coefficients(int n, int k) const {
  return coefficients(omega_members_[n].at(k));
}
std::vector<double> BrownianFamilies::t_coefficients(int n) const {
  return coefficients(t_members_.at(n));
}
std::vector<double> BrownianFamilies::v_jump_coefficients(int n) const {
  return coefficients(vj_members_.at(n));
}

namespace {

struct RhoSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd rhs;
};

RhoSystem assemble_rho(const BrownianFamilies& fam, int nodes) {
  const auto& lat = fam.params().lattice;
  const ScaleFamily& sc = fam.scale();
  const double lambda = fam.params().lambda;
  const double one_plus_a = 1.0 + lat.a;
  const int N = lat.N;
  auto L = [&](int n) { return lat.level(n); };

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N - 1, N - 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N - 1);
  auto add = [&](int row, int level, double val) {
    if (level == 0) return;  // rho_0 = 0
    if (level == N)
      rhs(row) += val;  // rho_N = 1
    else
      M(row, level - 1) += val;
  };

  for (int n = 1; n <= N - 1; ++n) {
    const int row = n - 1;
    const double d1 = L(n) - L(n + 1);
    const double span = L(n - 1) - L(n + 1);
    add(row, n + 1, sc.exit_down(d1, span));
    if (n >= 2) add(row, n - 1, sc.exit_up(d1, span));

    // Jump while between L_{n+1} and L_n: lands in interval n.
    Quad lo(nodes, L(n + 1), L(n));
    for (int i = 0; i < nodes; ++i) {
      const double y = lo.x[i];
      const double wgt = lambda * lo.w[i] * sc.resolvent(L(n), y, L(n + 1), L(n - 1));
      const double z = one_plus_a * y;
      add(row, n, wgt * fam.r(n, 0, z));
      for (int k = 1; k <= n - 1; ++k)
        add(row, n - k, wgt * (fam.r(n, k, z) + fam.omega(n, k, z)));
    }
    // Jump while between L_n and L_{n-1}: lands in interval n-1 (absent for
    // n = 1, where it would jump above the barrier and void the event).
    if (n >= 2) {
      Quad hi(nodes, L(n), L(n - 1));
      for (int i = 0; i < nodes; ++i) {
        const double y = hi.x[i];
        const double wgt = lambda * hi.w[i] * sc.resolvent(L(n), y, L(n + 1), L(n - 1));
        const double z = one_plus_a * y;
        add(row, n - 1, wgt * fam.r(n - 1, 0, z));
        for (int k = 1; k <= n - 2; ++k)
          add(row, n - 1 - k, wgt * (fam.r(n - 1, k, z) + fam.omega(n - 1, k, z)));
      }
    }
  }
  return {Eigen::MatrixXd::Identity(N - 1, N - 1) - M, rhs};
}

struct VSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd rhs;
};

VSystem assemble_v(const BrownianFamilies& fam, int nodes) {
  const auto& lat = fam.params().lattice;
  const ScaleFamily& sc = fam.scale();
  const double lambda = fam.params().lambda;
  const double one_plus_a = 1.0 + lat.a;
  const int N = lat.N;
  const double b = lat.b;
  auto L = [&](int n) { return lat.level(n); };

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
  auto add = [&](int row, int level, double val) {
    if (level >= N) return;  // v_N = 0
    M(row, level) += val;
  };

  // Row 0: the process reflected at b until it passes L_1 or the jump clock
  // rings; dividends accrue from the reflection and from jump overflow.
  {
    rhs(0) += sc.barrier_dividend_rate(b, L(1));
    Quad qy(nodes, L(1), b);
    for (int i = 0; i < nodes; ++i) {
      const double y = qy.x[i];
      const double wgt = lambda * qy.w[i] * sc.reflected_resolvent(b, y, L(1), b);
      rhs(0) += wgt * (one_plus_a * y - b);
      add(0, 0, wgt);  // jump above b: pay overflow, restart at b
    }
    add(0, 1, sc.reflected_exit(b, L(1), b));
  }

  // Row 1: resolvent on (L_2, L_0); jumps from (L_1, L_0) overflow directly.
  if (N >= 2) {
    const double d1 = L(1) - L(2);
    const double span = L(0) - L(2);
    add(1, 2, sc.exit_down(d1, span));
    add(1, 0, sc.exit_up(d1, span));
    Quad lo(nodes, L(2), L(1));
    for (int i = 0; i < nodes; ++i) {
      const double y = lo.x[i];
      const double wgt = lambda * lo.w[i] * sc.resolvent(L(1), y, L(2), L(0));
      const double z = one_plus_a * y;
      add(1, 1, wgt * fam.r(1, 0, z));
      add(1, 0, wgt * (fam.t_up(1, z) + fam.omega(1, 1, z)));
      rhs(1) += wgt * fam.v_jump(1, z);
    }
    Quad hi(nodes, L(1), L(0));
    for (int i = 0; i < nodes; ++i) {
      const double y = hi.x[i];
      const double wgt = lambda * hi.w[i] * sc.resolvent(L(1), y, L(2), L(0));
      rhs(1) += wgt * (one_plus_a * y - b);
      add(1, 0, wgt);  // jump above b: restart at b
    }
  }

  for (int n = 2; n <= N - 1; ++n) {
    const double d1 = L(n) - L(n + 1);
    const double span = L(n - 1) - L(n + 1);
    add(n, n + 1, sc.exit_down(d1, span));
    add(n, n - 1, sc.exit_up(d1, span));
    Quad lo(nodes, L(n + 1), L(n));
    for (int i = 0; i < nodes; ++i) {
      const double y = lo.x[i];
      const double wgt = lambda * lo.w[i] * sc.resolvent(L(n), y, L(n + 1), L(n - 1));
      const double z = one_plus_a * y;
      add(n, n, wgt * fam.r(n, 0, z));
      for (int k = 1; k <= n - 1; ++k)
        add(n, n - k, wgt * (fam.r(n, k, z) + fam.omega(n, k, z)));
      add(n, 0, wgt * (fam.omega(n, n, z) + fam.t_up(n, z)));
      rhs(n) += wgt * fam.v_jump(n, z);
    }
    Quad hi(nodes, L(n), L(n - 1));
    for (int i = 0; i < nodes; ++i) {
      const double y = hi.x[i];
      const double wgt = lambda * hi.w[i] * sc.resolvent(L(n), y, L(n + 1), L(n - 1));
      const double z = one_plus_a * y;
      add(n, n - 1, wgt * fam.r(n - 1, 0, z));
      for (int k = 1; k <= n - 2; ++k)
        add(n, n - 1 - k, wgt * (fam.r(n - 1, k, z) + fam.omega(n - 1, k, z)));
      add(n, 0, wgt * (fam.omega(n - 1, n - 1, z) + fam.t_up(n - 1, z)));
      rhs(n) += wgt * fam.v_jump(n - 1, z);
    }
  }
  return {Eigen::MatrixXd::Identity(N, N) - M, rhs};
}

}  // namespace

BrownianSolution solve_brownian(const BrownianParams& params,
                                BrownianNumerics numerics, bool with_dividends) {
  BrownianSolution sol;
  sol.params = params;
  sol.families =
      std::make_shared<BrownianFamilies>(params, numerics, with_dividends);
  const int N = params.lattice.N;

  auto sys = assemble_rho(*sol.families, numerics.quad_nodes);
  auto [rho, cond] = solve_dense(sys.A, sys.rhs, "brownian exit system");
  auto sys2 = assemble_rho(*sol.families, 2 * numerics.quad_nodes);
  auto [rho2, cond2] = solve_dense(sys2.A, sys2.rhs, "brownian exit system (check)");
  sol.cond_rho = cond2;
  sol.quad_drift_rho = (rho2 - rho).cwiseAbs().maxCoeff() /
                       std::max(1e-300, rho2.cwiseAbs().maxCoeff());

  sol.rho.assign(N + 1, 0.0);
  for (int n = 1; n < N; ++n) sol.rho[n] = rho2(n - 1);
  sol.rho[0] = 0.0;
  sol.rho[N] = 1.0;

  if (with_dividends) {
    auto vs = assemble_v(*sol.families, numerics.quad_nodes);
    auto [v, vcond] = solve_dense(vs.A, vs.rhs, "brownian dividend system");
    auto vs2 = assemble_v(*sol.families, 2 * numerics.quad_nodes);
    auto [v2, vcond2] = solve_dense(vs2.A, vs2.rhs, "brownian dividend system (check)");
    sol.cond_v = vcond2;
    sol.quad_drift_v = (v2 - v).cwiseAbs().maxCoeff() /
                       std::max(1e-300, v2.cwiseAbs().maxCoeff());
    sol.v.assign(N + 1, 0.0);
    for (int n = 0; n < N; ++n) sol.v[n] = v2(n);
    sol.v[N] = 0.0;
  }
  return sol;
}

namespace {

int locate_interval(const LatticeParams& lat, double x, int* lattice_index) {
  const double t = std::log(lat.b / x) / std::log1p(lat.a);
  const long k = std::lround(t);
  *lattice_index = -1;
  if (k >= 0 && k <= lat.N && std::abs(t - static_cast<double>(k)) < 1e-9) {
    *lattice_index = static_cast<int>(k);
    return std::max(1, static_cast<int>(k));
  }
  return std::min(std::max(static_cast<int>(std::ceil(t)), 1), lat.N);
}

}  // namespace

double rho_eval_brownian(double x, const BrownianSolution& sol) {
  const auto& lat = sol.params.lattice;
  if (!(x > lat.level(lat.N) && x <= lat.b))
    throw std::domain_error("rho_eval_brownian: x must lie in (L_N, b]");
  int lattice = -1;
  const int n = locate_interval(lat, x, &lattice);
  if (lattice >= 0) return sol.rho[lattice];
  const auto& fam = *sol.families;
  double acc = fam.r(n, 0, x) * sol.rho[n];
  for (int k = 1; k <= n - 1; ++k)
    acc += (fam.r(n, k, x) + fam.omega(n, k, x)) * sol.rho[n - k];
  return acc;
}

double v_eval_brownian(double x, const BrownianSolution& sol) {
  const auto& lat = sol.params.lattice;
  if (sol.v.empty()) throw std::logic_error("v_eval_brownian: dividends not solved");
  if (x > lat.b) return sol.v[0] + x - lat.b;
  if (!(x > lat.level(lat.N)))
    throw std::domain_error("v_eval_brownian: x must be > L_N");
  int lattice = -1;
  const int n = locate_interval(lat, x, &lattice);
  if (lattice >= 0) return sol.v[lattice];
  const auto& fam = *sol.families;
  double acc = fam.v_jump(n, x);
  acc += fam.r(n, 0, x) * sol.v[n];
  for (int k = 1; k <= n - 1; ++k)
    acc += (fam.r(n, k, x) + fam.omega(n, k, x)) * sol.v[n - k];
  acc += (fam.omega(n, n, x) + fam.t_up(n, x)) * sol.v[0];
  return acc;
}

}  // namespace dualgain
