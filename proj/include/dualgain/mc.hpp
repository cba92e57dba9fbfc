#pragma once

#include <cstdint>

#include "dualgain/params.hpp"

namespace dualgain {

struct MCConfig {
  std::int64_t paths = 1'000'000;
  std::uint64_t seed = 1;
  // Escape level for infinite-horizon ruin runs: multiplier * max(x, 1).
  // With a > 0 the embedded chain diverges geometrically once large, so the
  // censoring error is exponentially small; it is reported, never hidden.
  double escape_multiplier = 1e3;
  double time_cap = 1e6;
  double euler_dt = 1e-4;  // Brownian model only
  int threads = 0;         // 0: DUALGAIN_THREADS env, then hardware count

  void validate() const;
};

struct MCEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::int64_t n_paths = 0;
  std::int64_t n_censored = 0;  // escape- and cap-terminated paths, total

  // Additive error bound contributed by the censored paths: time-cap hits
  // count in full (their fate is unknown); escape hits count with the
  // per-path misclassification bound of the escape rule, which for the
  // expanding models is exponentially small.
  double censor_bound_value = 0.0;
  double censor_bound() const { return censor_bound_value; }
};

// P(tau_x < infinity) for alpha = 0, otherwise E[e^{-alpha tau_x} 1{ruin}],
// by exact event-driven simulation of the renewal model.
MCEstimate simulate_ruin(const DualModelParams& params, double x, double alpha,
                         const MCConfig& cfg);

struct LatticeEstimates {
  MCEstimate rho;  // E[e^{-q d_N} 1{d_N < u_0}]
  MCEstimate mu;   // E[e^{-q u_0} 1{u_0 < d_N}]
  MCEstimate v;    // discounted dividends until absorption at L_N
};

// Exact event-driven simulation of the pure-proportional Poisson model with
// barrier reflection at b; all three estimands share one path ensemble.
LatticeEstimates simulate_lattice(const LatticeParams& params, double x,
                                  const MCConfig& cfg);

struct BrownianEstimates {
  MCEstimate rho;
  MCEstimate v;
  // Scale of the barrier-crossing discretization bias, O(sqrt(dt)).
  double euler_bias_scale = 0.0;
};

// Euler scheme between exactly-sampled jump epochs.
BrownianEstimates simulate_brownian_lattice(const BrownianParams& params, double x,
                                            const MCConfig& cfg);

// Resolved worker count for a config (exposed for the reproducibility report).
int mc_worker_count(const MCConfig& cfg);

}  // namespace dualgain
