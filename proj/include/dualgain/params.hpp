#pragma once

#include <optional>

#include "dualgain/interarrival.hpp"

namespace dualgain {

// Full parameterization of the dual risk model with proportional and
// additive gains: at an arrival the surplus jumps from u to (1+a)u + C
// with probability p, and to u + D with probability 1-p, where
// C ~ exp(mu) and D ~ exp(delta). mu == nullopt encodes C == 0 (pure
// proportional gains); it is a structural sentinel, not a mu -> inf limit.
struct DualModelParams {
  double a = 0.0;
  std::optional<double> mu;
  InterarrivalSpec interarrival = InterarrivalSpec::exponential(1.0);
  double mixture_p = 1.0;
  std::optional<double> delta;

  bool has_additive_gain() const { return mu.has_value(); }

  void validate() const;

  // Mean jump size E[p(aU+C) + (1-p)D] ignoring the proportional part,
  // i.e. the additive drift relevant when a == 0.
  double mean_additive_jump() const;
};

// Poisson level-lattice parameters (pure proportional model, C == 0).
// Levels L_n = b / (1+a)^n, n = 0..N, are strictly decreasing.
struct LatticeParams {
  double b = 1.0;
  int N = 2;
  double lambda = 1.0;
  double q = 0.0;
  double a = 0.5;

  void validate() const;
  double level(int n) const;        // L_n
  double gap(int n) const;          // L_{n-1} - L_n, n >= 1
};

// Brownian-perturbed model: X(t) = eta t + sigma B(t) replaces the unit
// downward drift; jumps are proportional at Poisson epochs.
struct BrownianParams {
  double eta = -1.0;
  double sigma = 1.0;
  double lambda = 1.0;
  double q = 0.0;
  LatticeParams lattice;

  void validate() const;
};

enum class DriftClass { Transient, CertainRuin, Critical };

// Long-run classification of the surplus process. With a > 0 the embedded
// chain is an expanding affine recursion and escapes with positive
// probability; with a == 0 ruin is certain iff mean interarrival >= mean
// jump (equality reported as Critical).
DriftClass classify_drift(const DualModelParams& params);

const char* to_string(DriftClass c);

}  // namespace dualgain
