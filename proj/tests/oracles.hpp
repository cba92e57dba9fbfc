#pragma once

// Test-only quadrature oracles, independent of the library's evaluation
// paths. Used to freeze expected values for convolution and transform
// identities.

#include <cmath>
#include <functional>

namespace oracle {

// Adaptive Simpson on [a, b].
inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (!std::isfinite(left + right)) return left + right;
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12, int depth = 40) {
  // Seed with 32 panels so narrow features cannot hide between samples.
  const int panels = 32;
  const double w = (b - a) / panels;
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + i * w, hi = lo + w;
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = w / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_rec(f, lo, hi, fa, fm, fb, whole, tol / panels, depth);
  }
  return total;
}

// (f * g)(x) = int_0^x f(t) g(x - t) dt by adaptive quadrature.
inline double convolve_at(const std::function<double(double)>& f,
                          const std::function<double(double)>& g, double x,
                          double tol = 1e-12) {
  if (x <= 0.0) return 0.0;
  return integrate([&](double t) { return f(t) * g(x - t); }, 0.0, x, tol);
}

}  // namespace oracle
