#pragma once

#include <atomic>
#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "unlearn/core_model.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

// A first-order oracle as consumed by the iterative runner and the harness:
// retain-only stochastic gradients plus an exact (or high-precision) retain
// excess risk for the first-passage observer.
template <class L>
concept LossOracle = requires(const L& l, std::span<const double> th, std::span<double> g, Rng& r) {
  { l.dim() } -> std::convertible_to<std::size_t>;
  { l.problem() } -> std::convertible_to<const ProblemSpec&>;
  { l.sample_gradient(th, r, g) } -> std::convertible_to<std::uint64_t>;
  { l.retain_excess(th) } -> std::convertible_to<double>;
  { l.eval_stride() } -> std::convertible_to<std::uint64_t>;
};

// The data distribution enters the synthetic losses only through a +-1 draw
// g(xi). Retain side: Rademacher with mean gamma_r. Forget side: the constant
// g_forget (the two-point construction used by the lower-bound instances).
struct RademacherMixture {
  double gamma_r = 0.0;   // E_{D_r}[g]
  double g_forget = 0.0;  // value of g on the forget support
  double rf = 0.0;

  double retain_mean() const { return gamma_r; }
  double full_mean() const { return (1.0 - rf) * gamma_r + rf * g_forget; }
};

RademacherMixture make_mixture(double gamma_r, double g_forget, double rf);

// Forget-side constant -min{1, (1-rf) gamma / rf} paired with retain mean
// gamma: the full-mixture mean collapses to ((1-rf) gamma - rf)_+, the
// construction behind the experimental protocol.
RademacherMixture make_hard_mixture(double gamma_r, double rf);

double sample_g(const RademacherMixture& mix, bool from_retain_only, Rng& rng);

// l(theta, xi) = (mu/2)|theta|^2 - (L/2) g(xi) theta_1.
// Everything about it is closed-form: retain optimum (L gamma / 2mu) e1,
// retain excess (mu/2)|theta - theta_r*|^2.
class SyntheticQuadraticLoss {
 public:
  SyntheticQuadraticLoss(ProblemSpec spec, RademacherMixture mix);

  std::size_t dim() const { return spec_.dim; }
  const ProblemSpec& problem() const { return spec_; }
  const RademacherMixture& mixture() const { return mix_; }

  void stochastic_gradient(std::span<const double> theta, double g_value,
                           std::span<double> out) const;
  std::uint64_t sample_gradient(std::span<const double> theta, Rng& rng,
                                std::span<double> out) const;

  double retain_excess(std::span<const double> theta) const;
  ParamVector retain_optimum() const;
  ParamVector full_optimum() const;
  double opt_distance() const;  // |theta* - theta_r*|

  std::uint64_t eval_stride() const { return 1; }

 private:
  ProblemSpec spec_;
  RademacherMixture mix_;
};

// The experimental synthetic loss: the quadratic instance spread over the
// first d/2 coordinates at half scale, plus an L1 penalty on the last d/2 to
// keep the landscape non-smooth. dim must be even.
//   l(theta, xi) = (mu/2)|theta|^2 - (L/4) g(xi) sum_{i<d/2} theta_i
//                  + (L/4) sum_{i>=d/2} |theta_i|
class SyntheticExperimentalLoss {
 public:
  SyntheticExperimentalLoss(ProblemSpec spec, RademacherMixture mix);

  std::size_t dim() const { return spec_.dim; }
  const ProblemSpec& problem() const { return spec_; }
  const RademacherMixture& mixture() const { return mix_; }

  void stochastic_gradient(std::span<const double> theta, double g_value,
                           std::span<double> out) const;
  std::uint64_t sample_gradient(std::span<const double> theta, Rng& rng,
                                std::span<double> out) const;

  double retain_excess(std::span<const double> theta) const;
  ParamVector retain_optimum() const;
  ParamVector full_optimum() const;
  double opt_distance() const;

  std::uint64_t eval_stride() const { return 1; }

 private:
  double tilted_coordinate_minimum() const;  // min_x (mu/2)x^2 - (L/4) gamma x

  ProblemSpec spec_;
  RademacherMixture mix_;
};

// Row-major feature matrix with a seeded retain/forget split.
struct ErmDataset {
  std::size_t n = 0;
  std::size_t p = 0;
  int n_classes = 0;
  std::vector<double> features;  // n * p
  std::vector<int> labels;       // n
  std::vector<std::uint32_t> retain_indices;
  std::vector<std::uint32_t> forget_indices;
};

// Uniformly random forget subset of size floor(rf * n); both index lists come
// back sorted so the split is a pure function of (data, rf, rng draw).
ErmDataset split_dataset(std::vector<double> features, std::vector<int> labels, std::size_t p,
                         double rf, Rng& rng);

// Dataset CSV format: header f0..f{p-1},label; decimal floats, integer class
// ids, comma separated.
void write_dataset_csv(const std::string& path, const std::vector<double>& features,
                       const std::vector<int>& labels, std::size_t p);
struct RawDataset {
  std::size_t n = 0, p = 0;
  std::vector<double> features;
  std::vector<int> labels;
};
RawDataset load_dataset_csv(const std::string& path);

struct ErmOptions {
  double l2_weight = 1.0;
  std::size_t batch_size = 64;
  std::uint64_t eval_every = 10;
  double opt_tol = 1e-8;          // gradient-norm target for the optima
  std::uint64_t opt_max_iters = 1'000'000;
  int lipschitz_probes = 256;
  double lipschitz_safety = 1.1;
};

// Multiclass cross-entropy with L2 regularization of weight l2_weight (the
// strong-convexity modulus). Parameters are the K x p weight matrix, row
// major by class. The Lipschitz constant is measured: max per-sample gradient
// norm over the dataset at `lipschitz_probes` points of the radius-R ball,
// times a safety factor, iterated to self-consistency since R depends on L.
class ErmLoss {
 public:
  static ErmLoss build(ErmDataset data, const ErmOptions& opts, Rng& rng);

  std::size_t dim() const { return spec_.dim; }
  const ProblemSpec& problem() const { return spec_; }
  const ErmDataset& dataset() const { return data_; }

  std::uint64_t sample_gradient(std::span<const double> theta, Rng& rng,
                                std::span<double> out) const;

  // empirical retain loss minus the stored retain optimum value, clamped at 0
  double retain_excess(std::span<const double> theta) const;

  std::uint64_t eval_stride() const { return opts_.eval_every; }
  std::uint64_t batch_size() const { return opts_.batch_size; }

  const ParamVector& retain_optimum() const { return retain_opt_; }
  const ParamVector& full_optimum() const { return full_opt_; }
  double retain_opt_value() const { return retain_opt_value_; }
  double lipschitz_estimate() const { return spec_.lipschitz; }
  double opt_distance() const;
  std::uint64_t clamp_events() const;

  // full-batch objective and gradient over an index set (used by the optimum
  // solver and the tests' brute-force oracles)
  double loss_over(std::span<const std::uint32_t> idx, std::span<const double> theta) const;
  void gradient_over(std::span<const std::uint32_t> idx, std::span<const double> theta,
                     std::span<double> out) const;
  void sample_gradient_at(std::uint32_t row, std::span<const double> theta,
                          std::span<double> out) const;
  double sample_loss_at(std::uint32_t row, std::span<const double> theta) const;

 private:
  ErmLoss(ErmDataset data, const ErmOptions& opts);

  double measure_lipschitz(Rng& rng) const;
  ParamVector minimize(std::span<const std::uint32_t> idx) const;

  ErmDataset data_;
  ErmOptions opts_;
  int classes_ = 0;
  ProblemSpec spec_;
  ParamVector retain_opt_;
  ParamVector full_opt_;
  double retain_opt_value_ = 0.0;
  // bumped through std::atomic_ref so the loss stays movable
  mutable std::uint64_t clamp_events_ = 0;
};

static_assert(LossOracle<SyntheticQuadraticLoss>);
static_assert(LossOracle<SyntheticExperimentalLoss>);
static_assert(LossOracle<ErmLoss>);

}  // namespace unlearn
