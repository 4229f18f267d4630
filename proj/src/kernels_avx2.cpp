// AVX2 kernel variants. This translation unit is compiled with -mavx2; the
// functions are only reachable after the runtime cpuid check in avx2_ops().
// Elementwise kernels use mul+add (no FMA) so results match the scalar
// reference bit for bit; reductions keep one vector accumulator and fold the
// lanes in a fixed order.

#include "unlearn/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define UNLEARN_HAVE_AVX2_TU 1
#include <immintrin.h>

#include <cmath>
#endif

namespace unlearn::kernels {

#if defined(UNLEARN_HAVE_AVX2_TU)

namespace {

void v_axpy(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void v_scal(std::size_t n, double a, double* x) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= a;
}

void v_scaled_copy(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] = a * x[i];
}

double fold_lanes(__m256d v) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, v);
  return ((lane[0] + lane[1]) + lane[2]) + lane[3];
}

double v_dot(std::size_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  double r = fold_lanes(acc);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

double v_sumsq(std::size_t n, const double* x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(vx, vx));
  }
  double r = fold_lanes(acc);
  for (; i < n; ++i) r += x[i] * x[i];
  return r;
}

double v_sqdist(std::size_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double r = fold_lanes(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    r += d * d;
  }
  return r;
}

double v_sum(std::size_t n, const double* x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double r = fold_lanes(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

double v_asum(std::size_t n, const double* x) {
  // clear the sign bit
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(x + i)));
  }
  double r = fold_lanes(acc);
  for (; i < n; ++i) r += std::fabs(x[i]);
  return r;
}

constexpr Ops kAvx2{
    "avx2", v_axpy, v_scal, v_scaled_copy, v_dot, v_sumsq, v_sqdist, v_sum, v_asum,
};

}  // namespace

const Ops* avx2_ops() {
  static const Ops* ops = __builtin_cpu_supports("avx2") ? &kAvx2 : nullptr;
  return ops;
}

#else

const Ops* avx2_ops() { return nullptr; }

#endif

}  // namespace unlearn::kernels
