#include "dualgain/kernels.hpp"

#include <vector>

namespace dualgain::kern {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

double dot_avx2(const double* a, const double* b, std::size_t n);
bool avx2_available();

}  // namespace detail

namespace {

using DotFn = double (*)(const double*, const double*, std::size_t);

struct Dispatch {
  DotFn dot;
  Isa isa;
};

Dispatch pick(Isa wanted) {
  if (wanted == Isa::Avx2 && detail::avx2_available())
    return {detail::dot_avx2, Isa::Avx2};
  return {detail::dot_scalar, Isa::Scalar};
}

Dispatch& dispatch() {
  static Dispatch d = pick(Isa::Avx2);
  return d;
}

}  // namespace

Isa active_isa() { return dispatch().isa; }

Isa force_isa(Isa isa) {
  dispatch() = pick(isa);
  return dispatch().isa;
}

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().dot(a, b, n);
}

void conv_trapezoid(const double* f, const double* g, std::size_t n, double h,
                    double* out) {
  if (n == 0) return;
  // Reverse g once so every output value is a contiguous dot product.
  thread_local std::vector<double> grev;
  grev.resize(n);
  for (std::size_t i = 0; i < n; ++i) grev[i] = g[n - 1 - i];
  const double* gr = grev.data();
  const DotFn dotfn = dispatch().dot;
  out[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    // sum_{j=0..i} f[j] * g[i-j] == dot(f, gr + n-1-i, i+1)
    const double full = dotfn(f, gr + (n - 1 - i), i + 1);
    out[i] = h * (full - 0.5 * (f[0] * g[i] + f[i] * g[0]));
  }
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

}  // namespace dualgain::kern
