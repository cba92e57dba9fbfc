#include "dualgain/mc.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <vector>

#include "dualgain/kernels.hpp"
#include "dualgain/rng.hpp"

namespace dualgain {

void MCConfig::validate() const {
  if (paths < 1000) throw std::invalid_argument("mc: paths must be >= 1000");
  if (euler_dt <= 0.0) throw std::invalid_argument("mc: euler_dt must be > 0");
  if (time_cap <= 0.0) throw std::invalid_argument("mc: time_cap must be > 0");
}

int mc_worker_count(const MCConfig& cfg) {
  int t = cfg.threads;
  if (t <= 0) {
    if (const char* env = std::getenv("DUALGAIN_THREADS")) t = std::atoi(env);
  }
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, t);
}

namespace {

// Runs one scalar-valued contribution per path into a flat array, then
// reduces with pairwise summation. The reduction sees only the filled
// array, so the estimate is bit-identical for any worker count.
template <class PathFn>
void run_paths(std::int64_t paths, int workers, const PathFn& fn) {
  if (workers == 1) {
    for (std::int64_t i = 0; i < paths; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::int64_t chunk = (paths + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min(paths, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

MCEstimate reduce(const std::vector<double>& vals, std::int64_t censored,
                  double censor_bound) {
  const std::int64_t n = static_cast<std::int64_t>(vals.size());
  MCEstimate e;
  e.n_paths = n;
  e.n_censored = censored;
  e.censor_bound_value = censor_bound;
  e.mean = kern::pairwise_sum(vals.data(), vals.size()) / n;
  std::vector<double> sq(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double d = vals[i] - e.mean;
    sq[i] = d * d;
  }
  const double ss = kern::pairwise_sum(sq.data(), sq.size());
  e.stderr_ = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
  return e;
}

}  // namespace

MCEstimate simulate_ruin(const DualModelParams& params, double x, double alpha,
                         const MCConfig& cfg) {
  params.validate();
  cfg.validate();
  if (x <= 0.0) throw std::domain_error("simulate_ruin: x must be > 0");
  if (alpha < 0.0) throw std::domain_error("simulate_ruin: alpha must be >= 0");

  const double escape = cfg.escape_multiplier * std::max(x, 1.0);
  const double a = params.a;
  const double p = params.mixture_p;
  const bool additive = params.has_additive_gain();
  const double mu = additive ? *params.mu : 0.0;
  const double delta = params.delta ? *params.delta : 0.0;

  std::vector<double> vals(cfg.paths, 0.0);
  std::vector<std::uint8_t> cens(cfg.paths, 0);  // 1 = escape, 2 = time cap

  run_paths(cfg.paths, mc_worker_count(cfg), [&](std::int64_t i) {
    Rng rng = Rng::for_path(cfg.seed, static_cast<std::uint64_t>(i));
    double u = x, t = 0.0;
    for (;;) {
      const double gap = params.interarrival.sample(rng);
      if (gap >= u) {
        // Between arrivals the level falls at unit rate: exact ruin time.
        const double tau = t + u;
        vals[i] = alpha == 0.0 ? 1.0 : std::exp(-alpha * tau);
        return;
      }
      t += gap;
      u -= gap;
      if (p >= 1.0 || rng.uniform() < p) {
        u = (1.0 + a) * u + (additive ? rng.exponential(mu) : 0.0);
      } else {
        u += rng.exponential(delta);
      }
      if (u > escape) {
        cens[i] = 1;
        return;  // declared surviving; contributes 0
      }
      if (t > cfg.time_cap) {
        cens[i] = 2;
        return;
      }
    }
  });

  // Per-path misclassification of an escape declaration: ruin from a level
  // above `escape` needs some interarrival gap to reach the running level,
  // which keeps growing geometrically for a > 0; with an exponential tail
  // of rate r = min_rate this is conservatively below 2 e^{-r escape / 2}.
  // Deterministic gaps of size d cannot cross a level above d(1+a)/a at all.
  double escape_weight = 1.0;
  const double r = params.interarrival.min_rate();
  if (params.a > 0.0) {
    if (std::isinf(r)) {
      const double d = params.interarrival.deterministic_value();
      escape_weight = escape > 2.0 * d * (1.0 + params.a) / params.a ? 0.0 : 1.0;
    } else {
      escape_weight = std::min(1.0, 2.0 * std::exp(-0.5 * r * escape));
    }
  }
  std::int64_t censored = 0;
  double bound = 0.0;
  for (auto c : cens) {
    if (c == 0) continue;
    ++censored;
    bound += c == 1 ? escape_weight : 1.0;
  }
  return reduce(vals, censored, bound / static_cast<double>(cfg.paths));
}

LatticeEstimates simulate_lattice(const LatticeParams& params, double x,
                                  const MCConfig& cfg) {
  params.validate();
  cfg.validate();
  const double b = params.b;
  const double lN = params.level(params.N);
  if (!(x > lN && x <= b))
    throw std::domain_error("simulate_lattice: x must lie in (L_N, b]");

  const double a = params.a, lambda = params.lambda, q = params.q;
  std::vector<double> rho_vals(cfg.paths), mu_vals(cfg.paths), v_vals(cfg.paths);
  std::vector<std::uint8_t> cens(cfg.paths, 0);

  run_paths(cfg.paths, mc_worker_count(cfg), [&](std::int64_t i) {
    Rng rng = Rng::for_path(cfg.seed, static_cast<std::uint64_t>(i));
    double u = x, t = 0.0, dividends = 0.0;
    bool upcrossed = x >= b;  // starting at the barrier counts as up-crossed
    double u0 = upcrossed ? 0.0 : -1.0;
    double rho_c = 0.0, mu_c = upcrossed ? 1.0 : 0.0;
    for (;;) {
      const double gap = rng.exponential(lambda);
      if (gap >= u - lN) {
        const double dN = t + (u - lN);  // unit drift: exact hitting time
        if (!upcrossed) rho_c = std::exp(-q * dN);
        break;
      }
      t += gap;
      u -= gap;
      double un = (1.0 + a) * u;
      if (un > b) {
        if (!upcrossed) {
          upcrossed = true;
          u0 = t;
          mu_c = std::exp(-q * u0);
        }
        dividends += std::exp(-q * t) * (un - b);
        un = b;
      }
      u = un;
      if (t > cfg.time_cap) {
        cens[i] = 1;
        break;
      }
    }
    rho_vals[i] = rho_c;
    mu_vals[i] = mu_c;
    v_vals[i] = dividends;
    (void)u0;
  });

  std::int64_t censored = 0;
  for (auto c : cens) censored += c;
  const double bound = static_cast<double>(censored) / static_cast<double>(cfg.paths);
  LatticeEstimates est;
  est.rho = reduce(rho_vals, censored, bound);
  est.mu = reduce(mu_vals, censored, bound);
  est.v = reduce(v_vals, censored, bound);
  return est;
}

BrownianEstimates simulate_brownian_lattice(const BrownianParams& params, double x,
                                            const MCConfig& cfg) {
  params.validate();
  cfg.validate();
  const double b = params.lattice.b;
  const double lN = params.lattice.level(params.lattice.N);
  if (!(x > lN && x <= b))
    throw std::domain_error("simulate_brownian_lattice: x must lie in (L_N, b]");

  const double a = params.lattice.a, lambda = params.lambda, q = params.q;
  const double dt = cfg.euler_dt;
  const double drift = params.eta * dt;
  const double vol = params.sigma * std::sqrt(dt);

  std::vector<double> rho_vals(cfg.paths), v_vals(cfg.paths);
  std::vector<std::uint8_t> cens(cfg.paths, 0);

  run_paths(cfg.paths, mc_worker_count(cfg), [&](std::int64_t i) {
    Rng rng = Rng::for_path(cfg.seed, static_cast<std::uint64_t>(i));
    double u = x, t = 0.0, dividends = 0.0;
    bool upcrossed = x >= b;
    double rho_c = 0.0;
    double to_jump = rng.exponential(lambda);
    for (;;) {
      if (t > cfg.time_cap) {
        cens[i] = 1;
        break;
      }
      if (to_jump <= dt) {
        // Partial Euler step to the exactly-sampled jump epoch.
        const double h = to_jump;
        u += params.eta * h + params.sigma * std::sqrt(h) * rng.normal();
        t += h;
        if (u <= lN) {
          if (!upcrossed) rho_c = std::exp(-q * t);
          break;
        }
        if (u > b) {
          if (!upcrossed) upcrossed = true;
          dividends += std::exp(-q * t) * (u - b);
          u = b;
        }
        double un = (1.0 + a) * u;
        if (un > b) {
          if (!upcrossed) upcrossed = true;
          dividends += std::exp(-q * t) * (un - b);
          un = b;
        }
        u = un;
        to_jump = rng.exponential(lambda);
        continue;
      }
      u += drift + vol * rng.normal();
      t += dt;
      to_jump -= dt;
      if (u <= lN) {
        if (!upcrossed) rho_c = std::exp(-q * t);
        break;
      }
      if (u > b) {
        if (!upcrossed) upcrossed = true;
        dividends += std::exp(-q * t) * (u - b);
        u = b;
      }
    }
    rho_vals[i] = rho_c;
    v_vals[i] = dividends;
  });

  std::int64_t censored = 0;
  for (auto c : cens) censored += c;
  const double bound = static_cast<double>(censored) / static_cast<double>(cfg.paths);
  BrownianEstimates est;
  est.rho = reduce(rho_vals, censored, bound);
  est.v = reduce(v_vals, censored, bound);
  est.euler_bias_scale = params.sigma * std::sqrt(dt);
  return est;
}

}  // namespace dualgain
