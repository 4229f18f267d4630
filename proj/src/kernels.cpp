#include "unlearn/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace unlearn::kernels {

namespace {

void s_axpy(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void s_scal(std::size_t n, double a, double* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void s_scaled_copy(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

double s_dot(std::size_t n, const double* x, const double* y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double s_sumsq(std::size_t n, const double* x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double s_sqdist(std::size_t n, const double* x, const double* y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

double s_sum(std::size_t n, const double* x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double s_asum(std::size_t n, const double* x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(x[i]);
  return acc;
}

constexpr Ops kScalar{
    "scalar", s_axpy, s_scal, s_scaled_copy, s_dot, s_sumsq, s_sqdist, s_sum, s_asum,
};

const Ops* pick_active() {
  const char* want = std::getenv("UNLEARN_KERNELS");
  if (want != nullptr) {
    const std::string_view w{want};
    if (w == "scalar") return &kScalar;
    if (w == "avx2") {
      if (const Ops* ops = avx2_ops()) return ops;
      std::fprintf(stderr, "unlearn: UNLEARN_KERNELS=avx2 not supported here, using scalar\n");
      return &kScalar;
    }
    if (w == "neon") {
      if (const Ops* ops = neon_ops()) return ops;
      std::fprintf(stderr, "unlearn: UNLEARN_KERNELS=neon not supported here, using scalar\n");
      return &kScalar;
    }
    std::fprintf(stderr, "unlearn: unknown UNLEARN_KERNELS value '%s', using scalar\n", want);
    return &kScalar;
  }
  if (const Ops* ops = avx2_ops()) return ops;
  if (const Ops* ops = neon_ops()) return ops;
  return &kScalar;
}

}  // namespace

const Ops& scalar_ops() { return kScalar; }

const Ops& active() {
  static const Ops* chosen = pick_active();
  return *chosen;
}

}  // namespace unlearn::kernels
