#pragma once

#include <cstddef>

// Arithmetic inner loops used by the grid-convolution and reduction paths.
// Each kernel has a scalar reference implementation and an AVX2 variant;
// the active one is picked at runtime from CPU capabilities. The scalar
// path is the semantic reference and the SIMD variants are equivalence
// tested against it.
namespace dualgain::kern {

enum class Isa { Scalar, Avx2 };

// Currently selected instruction set.
Isa active_isa();

// Override the dispatch (tests only). Requesting an unsupported ISA falls
// back to scalar and returns the ISA actually selected.
Isa force_isa(Isa isa);

// sum_{i<n} a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// Trapezoid-rule convolution of two functions sampled on the same uniform
// grid with step h:
//   out[i] = h * ( f[0]g[i]/2 + sum_{0<j<i} f[j]g[i-j] + f[i]g[0]/2 )
// out may not alias f or g. out[0] = 0.
void conv_trapezoid(const double* f, const double* g, std::size_t n, double h,
                    double* out);

// Deterministic pairwise summation; the result does not depend on how the
// array was filled (thread partitioning), only on its contents.
double pairwise_sum(const double* x, std::size_t n);

}  // namespace dualgain::kern
