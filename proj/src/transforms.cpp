#include "dualgain/transforms.hpp"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dualgain {

namespace {

// (1 - phi(s)) / s with a series switch near s = 0 where the direct form
// cancels: (1 - phi(s))/s = E[T] - s E[T^2]/2 + O(s^2).
Complex one_minus_phi_over_s(const InterarrivalSpec& ia, Complex s) {
  const double m1 = ia.mean();
  if (std::abs(s) * m1 < 1e-6) return m1 - s * (ia.second_moment() / 2.0);
  return (1.0 - ia.lst_continued(s)) / s;
}

double one_minus_phi_over_s_real(const InterarrivalSpec& ia, double s) {
  return one_minus_phi_over_s(ia, Complex(s, 0)).real();
}

// Right inverse of theta -> theta - lambda*theta/(mu+theta) at level alpha
// (classical a = 0 model with Poisson arrivals and exp(mu) gains).
double classical_phi_inverse(double lambda, double mu, double alpha) {
  const double c = lambda + alpha - mu;
  return 0.5 * (c + std::sqrt(c * c + 4.0 * alpha * mu));
}

}  // namespace

void SeriesControl::validate() const {
  if (tail_tolerance <= 0.0) throw std::invalid_argument("series: tail_tolerance must be > 0");
  if (max_terms < 20) throw std::invalid_argument("series: max_terms must be >= 20");
}

double rouche_root(double delta, double p, const InterarrivalSpec& interarrival) {
  if (delta <= 0.0) throw std::invalid_argument("rouche_root: delta must be > 0");
  if (p <= 0.0 || p > 1.0) throw std::invalid_argument("rouche_root: p must be in (0,1]");
  if (p == 1.0) return delta;
  auto g = [&](double s) {
    return delta - s - (1.0 - p) * delta * interarrival.lst_real(s);
  };
  double lo = 0.0;                       // g(0) = p*delta > 0
  double hi = delta * (2.0 - p) + 1.0;   // g(hi) <= -(1-p)delta(1+phi) - 1 < 0
  if (!(g(lo) > 0.0) || !(g(hi) < 0.0))
    throw std::runtime_error("rouche_root: no sign change on the bracket");
  for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RuinTransform::RuinTransform(DualModelParams params, SeriesControl control)
    : params_(std::move(params)), control_(control) {
  params_.validate();
  control_.validate();

  if (params_.a == 0.0) {
    route_ = Route::ClassicalA0;
    if (params_.mixture_p < 1.0)
      throw std::invalid_argument("transform: mixture model requires a > 0");
    if (!params_.has_additive_gain()) {
      classical_zeta_ = 0.0;  // no gains at all: ruin at time x, R(x) = 1
    } else if (params_.interarrival.kind() == InterarrivalSpec::Kind::Exponential) {
      classical_zeta_ =
          classical_phi_inverse(params_.interarrival.rate(), *params_.mu, 0.0);
    } else if (classify_drift(params_) != DriftClass::Transient) {
      classical_zeta_ = 0.0;  // R(x) = 1
    } else {
      throw std::invalid_argument(
          "transform: a = 0 with non-Poisson arrivals in the transient regime "
          "has no supported closed form");
    }
    return;
  }

  if (!params_.has_additive_gain()) {
    route_ = Route::PureProportional;
    eps_sing_ = control_.singularity_guard;  // no H/J poles on this route
    return;
  }

  route_ = Route::Series;
  const double mu = *params_.mu;
  eps_sing_ = control_.singularity_guard > 0.0
                  ? control_.singularity_guard
                  : 1e-8 * mu * (1.0 + params_.a);

  // rho(mu) from the closed form: both sums run over the scaled arguments
  // mu/(1+a)^k, which stay strictly below the pole mu(1+a).
  const double a = params_.a;
  const auto& ia = params_.interarrival;
  const double inv = 1.0 / (1.0 + a);
  double num = 0.0, den = 1.0, P = 1.0, sk = mu, pow_k = 1.0;
  bool converged = false;
  for (int k = 0; k < control_.max_terms; ++k) {
    const double phi = ia.lst_real(sk);
    num += P * one_minus_phi_over_s_real(ia, sk);
    den += P * phi * pow_k / (pow_k * (1.0 + a) - 1.0);
    P *= phi * mu / (mu * (1.0 + a) - sk);
    sk *= inv;
    pow_k *= (1.0 + a);
    if (P * (ia.mean() + 1.0) / (1.0 - inv) < control_.tail_tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) throw std::runtime_error("rho(mu) series did not converge");
  rho_mu_ = num / den;

  if (params_.mixture_p < 1.0) solve_mixture_unknowns();
}

std::pair<Complex, Complex> RuinTransform::hj(Complex s) const {
  if (route_ != Route::Series)
    throw std::logic_error("hj: base-model H/J need a > 0 and finite mu");
  const double mu = *params_.mu;
  const double ma = mu * (1.0 + params_.a);
  if (s == Complex(ma, 0.0)) throw std::domain_error("hj: pole at s = mu(1+a)");
  const Complex J = params_.interarrival.lst(s) * mu / (ma - s);
  const Complex H = one_minus_phi_over_s(params_.interarrival, s) - J * rho_mu_;
  return {H, J};
}

std::pair<Complex, Complex> hj(Complex s, double rho_mu, const DualModelParams& params) {
  const double mu = *params.mu;
  const double ma = mu * (1.0 + params.a);
  if (s == Complex(ma, 0.0)) throw std::domain_error("hj: pole at s = mu(1+a)");
  const Complex J = params.interarrival.lst(s) * mu / (ma - s);
  const Complex H = one_minus_phi_over_s(params.interarrival, s) - J * rho_mu;
  return {H, J};
}

double rho_at_mu(const DualModelParams& params, const SeriesControl& control) {
  return RuinTransform(params, control).rho_at_mu();
}

double RuinTransform::rho_at_delta() const {
  if (params_.mixture_p >= 1.0)
    throw std::logic_error("rho_at_delta: mixture_p < 1 required");
  return rho_delta_;
}

double RuinTransform::rouche_s1() const {
  if (params_.mixture_p >= 1.0)
    throw std::logic_error("rouche_s1: mixture_p < 1 required");
  return s1_;
}

// Distance from s to the nearest pole of the iterated series terms:
// mu(1+a)^{j+1} for the base/time kernels and s1(1+a)^j for the mixture.
double RuinTransform::pole_distance(Complex s) const {
  if (route_ != Route::Series) return std::numeric_limits<double>::infinity();
  const double reach = std::abs(s) * (1.0 + params_.a) + 1.0;
  double d = std::numeric_limits<double>::infinity();
  double pole = *params_.mu * (1.0 + params_.a);
  while (pole <= reach) {
    d = std::min(d, std::abs(s - pole));
    pole *= (1.0 + params_.a);
  }
  if (params_.mixture_p < 1.0) {
    pole = s1_;
    while (pole <= reach) {
      d = std::min(d, std::abs(s - pole));
      pole *= (1.0 + params_.a);
    }
  }
  return d;
}

Complex RuinTransform::guard_or_eval(
    Complex s, SeriesDiag* diag,
    Complex (RuinTransform::*eval)(Complex, SeriesDiag*) const) const {
  if (pole_distance(s) >= eps_sing_ || eps_sing_ <= 0.0) return (this->*eval)(s, diag);
  // Removable singularity: offset symmetrically off the real axis and
  // average; the odd term cancels, leaving an O(eps^2) bias.
  const Complex off(0.0, 2.0 * eps_sing_);
  const Complex v = 0.5 * ((this->*eval)(s + off, diag) + (this->*eval)(s - off, diag));
  if (diag) diag->guarded = true;
  return v;
}

namespace {

struct TailState {
  double cap = 0.0;       // running bound on |H| at scaled arguments
  double last_j = 1.0;    // |J| of the latest term
  double worst_j = 0.0;   // max |J| past burn-in
};

// Stop rule shared by all series routes. remaining <= |P| * cap / (1 - r)
// once the |J| factors have settled below r < 1.
bool tail_done(const TailState& t, double absP, int k, double inv_1pa, double tol) {
  if (k < 3) return false;
  const double r = std::min(0.999, std::max(t.last_j, inv_1pa));
  if (r >= 0.999) return false;
  return absP * (2.0 * t.cap + 1e-300) / (1.0 - r) < tol;
}

}  // namespace

Complex RuinTransform::series_base(Complex s, SeriesDiag* diag) const {
  const double a = params_.a;
  const double inv = 1.0 / (1.0 + a);
  const auto& ia = params_.interarrival;
  const bool additive = params_.has_additive_gain();
  const double mu = additive ? *params_.mu : 0.0;
  const double ma = mu * (1.0 + a);

  Complex acc = 0.0, P = 1.0, sk = s;
  TailState tail;
  bool converged = false;
  int k = 0;
  for (; k < control_.max_terms; ++k) {
    const Complex phi = ia.lst_continued(sk);
    Complex J, H;
    if (additive) {
      J = phi * mu / (ma - sk);
      H = one_minus_phi_over_s(ia, sk) - J * rho_mu_;
    } else {
      J = phi * inv;
      H = one_minus_phi_over_s(ia, sk);
    }
    acc += P * H;
    P *= J;
    sk *= inv;
    tail.cap = std::max(tail.cap, std::abs(H));
    tail.last_j = std::abs(J);
    if (k >= 5) tail.worst_j = std::max(tail.worst_j, tail.last_j);
    if (tail_done(tail, std::abs(P), k, inv, control_.tail_tolerance)) {
      converged = true;
      break;
    }
  }
  if (!converged) throw std::runtime_error("ruin transform series did not converge");
  if (diag) {
    diag->terms = k + 1;
    diag->converged = true;
    diag->tail_ratio = tail.worst_j;
  }
  return acc;
}

Complex RuinTransform::series_mixture(Complex s, SeriesDiag* diag) const {
  const double a = params_.a;
  const double inv = 1.0 / (1.0 + a);
  const auto& ia = params_.interarrival;
  const double mu = *params_.mu;
  const double ma = mu * (1.0 + a);
  const double delta = *params_.delta;
  const double p = params_.mixture_p;

  Complex acc = 0.0, P = 1.0, sk = s;
  TailState tail;
  bool converged = false;
  int k = 0;
  for (; k < control_.max_terms; ++k) {
    const Complex phi = ia.lst_continued(sk);
    // All terms carry the factor (delta - s)/Dt with the Rouche function
    // Dt(s) = delta - s - (1-p) delta phi(s), which keeps s = delta regular.
    const Complex Dt = delta - sk - (1.0 - p) * delta * phi;
    const Complex J = p * phi * mu * (delta - sk) / ((ma - sk) * Dt);
    const Complex H = (one_minus_phi_over_s(ia, sk) * (delta - sk) -
                       (1.0 - p) * phi * delta * rho_delta_) /
                          Dt -
                      J * rho_mu_;
    acc += P * H;
    P *= J;
    sk *= inv;
    tail.cap = std::max(tail.cap, std::abs(H));
    tail.last_j = std::abs(J);
    if (k >= 5) tail.worst_j = std::max(tail.worst_j, tail.last_j);
    if (tail_done(tail, std::abs(P), k, inv, control_.tail_tolerance)) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw std::runtime_error("generalized ruin transform series did not converge");
  if (diag) {
    diag->terms = k + 1;
    diag->converged = true;
    diag->tail_ratio = tail.worst_j;
  }
  return acc;
}

void RuinTransform::solve_mixture_unknowns() {
  const double a = params_.a;
  const double inv = 1.0 / (1.0 + a);
  const auto& ia = params_.interarrival;
  const double mu = *params_.mu;
  const double ma = mu * (1.0 + a);
  const double delta = *params_.delta;
  const double p = params_.mixture_p;

  s1_ = rouche_root(delta, p, ia);

  // rho(s) = A0(s) + Am(s) rho(mu) + Ad(s) rho(delta); accumulate the three
  // series components at real s.
  auto components = [&](double s) {
    double A0 = 0.0, Am = 0.0, Ad = 0.0, P = 1.0, sk = s;
    TailState tail;
    bool converged = false;
    for (int k = 0; k < control_.max_terms; ++k) {
      const double phi = ia.lst_real(sk);
      const double Dt = delta - sk - (1.0 - p) * delta * phi;
      if (std::abs(Dt) < 1e-13 * delta)
        throw std::runtime_error("mixture series hit the Rouche root; "
                                 "perturb the evaluation point");
      const double J = p * phi * mu * (delta - sk) / ((ma - sk) * Dt);
      const double h0 = one_minus_phi_over_s_real(ia, sk) * (delta - sk) / Dt;
      const double hd = -(1.0 - p) * phi * delta / Dt;
      A0 += P * h0;
      Am += P * (-J);
      Ad += P * hd;
      P *= J;
      sk *= inv;
      tail.cap = std::max({tail.cap, std::abs(h0), std::abs(hd), std::abs(J)});
      tail.last_j = std::abs(J);
      if (tail_done(tail, std::abs(P), k, inv, control_.tail_tolerance)) {
        converged = true;
        break;
      }
    }
    if (!converged) throw std::runtime_error("mixture component series did not converge");
    return std::array<double, 3>{A0, Am, Ad};
  };

  // Unknowns: (rho(mu), rho(delta), rho(s1/(1+a))).
  const auto eq1 = components(mu);
  const auto eq3 = components(s1_ / (1.0 + a));
  const double phi1 = ia.lst_real(s1_);
  const double c = p * phi1 * mu / (ma - s1_);
  const double d = (1.0 - p) * delta * phi1 / (delta - s1_);

  Eigen::Matrix3d M;
  Eigen::Vector3d rhs;
  M << eq1[1] - 1.0, eq1[2], 0.0,
       eq3[1],       eq3[2], -1.0,
       -c,           -d,     c;
  rhs << -eq1[0], -eq3[0], -one_minus_phi_over_s_real(ia, s1_);

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smin = svd.singularValues()(2);
  const double smax = svd.singularValues()(0);
  mixture_cond_ = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (smin <= smax * 1e-13)
    throw std::runtime_error("mixture unknowns: singular 3x3 system, condition number " +
                             std::to_string(mixture_cond_));
  const Eigen::Vector3d u = svd.solve(rhs);
  rho_mu_ = u(0);
  rho_delta_ = u(1);
  rho_s1_scaled_ = u(2);
}

Complex RuinTransform::series_time(Complex s, double alpha, SeriesDiag* diag) const {
  const double a = params_.a;
  const double inv = 1.0 / (1.0 + a);
  const auto& ia = params_.interarrival;
  const bool additive = params_.has_additive_gain();
  const double mu = additive ? *params_.mu : 0.0;
  const double ma = mu * (1.0 + a);
  const double tau_mu = additive ? tau_at_mu(alpha) : 0.0;

  Complex acc = 0.0, P = 1.0, sk = s;
  TailState tail;
  bool converged = false;
  int k = 0;
  for (; k < control_.max_terms; ++k) {
    const Complex phi_shift = ia.lst_continued(sk + alpha);
    Complex J, H;
    if (additive) {
      J = phi_shift * mu / (ma - sk);
      H = one_minus_phi_over_s(ia, sk + alpha) - J * tau_mu;
    } else {
      J = phi_shift * inv;
      H = one_minus_phi_over_s(ia, sk + alpha);
    }
    acc += P * H;
    P *= J;
    sk *= inv;
    tail.cap = std::max(tail.cap, std::abs(H));
    tail.last_j = std::abs(J);
    if (k >= 5) tail.worst_j = std::max(tail.worst_j, tail.last_j);
    if (tail_done(tail, std::abs(P), k, inv, control_.tail_tolerance)) {
      converged = true;
      break;
    }
  }
  if (!converged) throw std::runtime_error("ruin-time transform series did not converge");
  if (diag) {
    diag->terms = k + 1;
    diag->converged = true;
    diag->tail_ratio = tail.worst_j;
  }
  return acc;
}

double RuinTransform::tau_at_mu(double alpha) const {
  if (alpha < 0.0) throw std::domain_error("tau_at_mu: alpha must be >= 0");
  if (route_ != Route::Series)
    throw std::logic_error("tau_at_mu: requires a > 0 and finite mu");
  if (alpha == 0.0) return rho_mu_;
  {
    std::lock_guard<std::mutex> lock(tau_mu_mutex_);
    auto it = tau_mu_cache_.find(alpha);
    if (it != tau_mu_cache_.end()) return it->second;
  }
  const double a = params_.a;
  const double inv = 1.0 / (1.0 + a);
  const auto& ia = params_.interarrival;
  const double mu = *params_.mu;
  double num = 0.0, den = 1.0, P = 1.0, sk = mu, pow_k = 1.0;
  bool converged = false;
  for (int k = 0; k < control_.max_terms; ++k) {
    const double phi = ia.lst_real(sk + alpha);
    num += P * one_minus_phi_over_s_real(ia, sk + alpha);
    den += P * phi * pow_k / (pow_k * (1.0 + a) - 1.0);
    P *= phi * mu / (mu * (1.0 + a) - sk);
    sk *= inv;
    pow_k *= (1.0 + a);
    if (P * (ia.mean() + 1.0) / (1.0 - inv) < control_.tail_tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) throw std::runtime_error("tau(mu,alpha) series did not converge");
  const double v = num / den;
  std::lock_guard<std::mutex> lock(tau_mu_mutex_);
  tau_mu_cache_[alpha] = v;
  return v;
}

Complex RuinTransform::ruin_lt(Complex s) const { return ruin_lt(s, nullptr); }

Complex RuinTransform::ruin_lt_continued(Complex s) const {
  if (route_ == Route::ClassicalA0) return 1.0 / (s + classical_zeta_);
  if (params_.mixture_p < 1.0) return generalized_ruin_lt_continued(s);
  return guard_or_eval(s, nullptr, &RuinTransform::series_base);
}

Complex RuinTransform::generalized_ruin_lt_continued(Complex s) const {
  if (params_.mixture_p >= 1.0) return ruin_lt_continued(s);
  return guard_or_eval(s, nullptr, &RuinTransform::series_mixture);
}

Complex RuinTransform::ruin_time_lt_continued(Complex s, double alpha) const {
  if (alpha < 0.0) throw std::domain_error("ruin_time_lt: alpha must be >= 0");
  if (params_.mixture_p < 1.0)
    throw std::logic_error("ruin_time_lt: mixture model not supported");
  if (route_ == Route::ClassicalA0) {
    if (!params_.has_additive_gain()) return 1.0 / (s + alpha);
    return 1.0 / (s + classical_phi_inverse(params_.interarrival.rate(), *params_.mu, alpha));
  }
  auto eval = [this, alpha](Complex z, SeriesDiag* d) { return series_time(z, alpha, d); };
  if (pole_distance(s) >= eps_sing_ || eps_sing_ <= 0.0) return eval(s, nullptr);
  const Complex off(0.0, 2.0 * eps_sing_);
  return 0.5 * (eval(s + off, nullptr) + eval(s - off, nullptr));
}

Complex RuinTransform::ruin_lt(Complex s, SeriesDiag* diag) const {
  if (s.real() <= 0.0) throw std::domain_error("ruin_lt: Re(s) > 0 required");
  if (route_ == Route::ClassicalA0) return 1.0 / (s + classical_zeta_);
  if (params_.mixture_p < 1.0) return generalized_ruin_lt(s, diag);
  return guard_or_eval(s, diag, &RuinTransform::series_base);
}

Complex RuinTransform::generalized_ruin_lt(Complex s) const {
  return generalized_ruin_lt(s, nullptr);
}

Complex RuinTransform::generalized_ruin_lt(Complex s, SeriesDiag* diag) const {
  if (s.real() <= 0.0) throw std::domain_error("generalized_ruin_lt: Re(s) > 0 required");
  if (params_.mixture_p >= 1.0) return ruin_lt(s, diag);
  return guard_or_eval(s, diag, &RuinTransform::series_mixture);
}

Complex RuinTransform::ruin_time_lt(Complex s, double alpha) const {
  return ruin_time_lt(s, alpha, nullptr);
}

Complex RuinTransform::ruin_time_lt(Complex s, double alpha, SeriesDiag* diag) const {
  if (s.real() <= 0.0) throw std::domain_error("ruin_time_lt: Re(s) > 0 required");
  if (alpha < 0.0) throw std::domain_error("ruin_time_lt: alpha must be >= 0");
  if (params_.mixture_p < 1.0)
    throw std::logic_error("ruin_time_lt: mixture model not supported");
  if (route_ == Route::ClassicalA0) {
    if (!params_.has_additive_gain())
      return 1.0 / (s + alpha);  // deterministic descent: tau_x = x
    if (params_.interarrival.kind() != InterarrivalSpec::Kind::Exponential)
      throw std::logic_error("ruin_time_lt: a = 0 requires Poisson arrivals");
    return 1.0 / (s + classical_phi_inverse(params_.interarrival.rate(), *params_.mu, alpha));
  }
  auto eval = [this, alpha](Complex z, SeriesDiag* d) { return series_time(z, alpha, d); };
  if (pole_distance(s) >= eps_sing_ || eps_sing_ <= 0.0) return eval(s, diag);
  const Complex off(0.0, 2.0 * eps_sing_);
  const Complex v = 0.5 * (eval(s + off, diag) + eval(s - off, diag));
  if (diag) diag->guarded = true;
  return v;
}

}  // namespace dualgain
