// NEON kernel variants (aarch64). NEON is baseline on aarch64, so the runtime
// check is just the architecture.

#include "unlearn/kernels.hpp"

#if defined(__aarch64__)
#define UNLEARN_HAVE_NEON_TU 1
#include <arm_neon.h>

#include <cmath>
#endif

namespace unlearn::kernels {

#if defined(UNLEARN_HAVE_NEON_TU)

namespace {

void v_axpy(std::size_t n, double a, const double* x, double* y) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void v_scal(std::size_t n, double a, double* x) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void v_scaled_copy(std::size_t n, double a, const double* x, double* y) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = a * x[i];
}

double fold(float64x2_t v) { return vgetq_lane_f64(v, 0) + vgetq_lane_f64(v, 1); }

double v_dot(std::size_t n, const double* x, const double* y) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  double r = fold(acc);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

double v_sumsq(std::size_t n, const double* x) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vx = vld1q_f64(x + i);
    acc = vaddq_f64(acc, vmulq_f64(vx, vx));
  }
  double r = fold(acc);
  for (; i < n; ++i) r += x[i] * x[i];
  return r;
}

double v_sqdist(std::size_t n, const double* x, const double* y) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    acc = vaddq_f64(acc, vmulq_f64(d, d));
  }
  double r = fold(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    r += d * d;
  }
  return r;
}

double v_sum(std::size_t n, const double* x) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double r = fold(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

double v_asum(std::size_t n, const double* x) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vabsq_f64(vld1q_f64(x + i)));
  double r = fold(acc);
  for (; i < n; ++i) r += std::fabs(x[i]);
  return r;
}

constexpr Ops kNeon{
    "neon", v_axpy, v_scal, v_scaled_copy, v_dot, v_sumsq, v_sqdist, v_sum, v_asum,
};

}  // namespace

const Ops* neon_ops() { return &kNeon; }

#else

const Ops* neon_ops() { return nullptr; }

#endif

}  // namespace unlearn::kernels
