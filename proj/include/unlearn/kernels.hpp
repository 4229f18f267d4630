#pragma once

#include <cstddef>
#include <string_view>

namespace unlearn::kernels {

// Dense double-precision kernels backing the SGD inner loops, the averaged-
// iterate bookkeeping, and the closed-form excess evaluations.
//
// Every operation has a scalar reference implementation plus, where the host
// CPU supports it, a SIMD variant (AVX2 on x86-64, NEON on aarch64) selected
// once at startup. Elementwise kernels are bit-identical across variants (no
// FMA contraction); reductions may differ by a few ulps because the summation
// order differs.
struct Ops {
  std::string_view name;

  // y += a * x
  void (*axpy)(std::size_t n, double a, const double* x, double* y);
  // x *= a
  void (*scal)(std::size_t n, double a, double* x);
  // y = a * x
  void (*scaled_copy)(std::size_t n, double a, const double* x, double* y);

  double (*dot)(std::size_t n, const double* x, const double* y);
  double (*sumsq)(std::size_t n, const double* x);
  // sum of (x[i] - y[i])^2
  double (*sqdist)(std::size_t n, const double* x, const double* y);
  double (*sum)(std::size_t n, const double* x);
  // sum of |x[i]|
  double (*asum)(std::size_t n, const double* x);
};

const Ops& scalar_ops();

// nullptr when the variant is not compiled in or the CPU lacks the feature.
const Ops* avx2_ops();
const Ops* neon_ops();

// The variant used by the rest of the library: best supported one, unless the
// UNLEARN_KERNELS environment variable (scalar|avx2|neon) overrides it. An
// unsupported override falls back to scalar with a one-time stderr warning.
// The choice is made once and cached for the lifetime of the process.
const Ops& active();

}  // namespace unlearn::kernels
