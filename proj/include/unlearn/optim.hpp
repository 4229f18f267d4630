#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "unlearn/core_model.hpp"
#include "unlearn/kernels.hpp"
#include "unlearn/losses.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

// Step-size rules of the iterative runner. The decaying rules pair with the
// (t+1)-weighted running average; constant_step pairs with the uniform
// average (that is the average its convergence guarantee speaks about).
// geometric_decay is the realistic ERM schedule: step0 * factor^(t / every).
struct UpdateRule {
  enum class Kind { decaying_avg_scratch, decaying_avg_finetune, constant_step, geometric_decay };

  Kind kind = Kind::decaying_avg_scratch;
  double step_constant = 0.0;    // constant_step
  double step0 = 1e-2;           // geometric_decay
  double decay_factor = 0.6;     // geometric_decay
  std::uint64_t decay_every = 1; // geometric_decay, in optimizer steps

  static UpdateRule scratch() { return {Kind::decaying_avg_scratch, 0.0, 0, 0, 1}; }
  static UpdateRule finetune() { return {Kind::decaying_avg_finetune, 0.0, 0, 0, 1}; }
  static UpdateRule constant(double step) { return {Kind::constant_step, step, 0, 0, 1}; }
  static UpdateRule geometric(double step0, double factor, std::uint64_t every) {
    UpdateRule r;
    r.kind = Kind::geometric_decay;
    r.step0 = step0;
    r.decay_factor = factor;
    r.decay_every = every == 0 ? 1 : every;
    return r;
  }

  double step_size(std::uint64_t t, double mu) const {
    switch (kind) {
      case Kind::decaying_avg_scratch:
        return 2.0 / (mu * static_cast<double>(t + 2));
      case Kind::decaying_avg_finetune:
        return 2.0 / (mu * static_cast<double>(t + 1));
      case Kind::constant_step:
        return step_constant;
      case Kind::geometric_decay:
        return step0 * std::pow(decay_factor, static_cast<double>(t / decay_every));
    }
    return 0.0;
  }

  // weight of iterate theta_t in the running average
  double average_weight(std::uint64_t t) const {
    return kind == Kind::constant_step ? 1.0 : static_cast<double>(t + 1);
  }
};

// Current iterate plus the weighted-sum memory of all iterates so far
// (theta_0 .. theta_step); the averaged model is memory / weight.
struct IterState {
  ParamVector theta;
  ParamVector memory;
  double weight = 0.0;
  std::uint64_t step = 0;
  std::uint64_t gradient_accesses = 0;
};

struct DivergenceError : std::runtime_error {
  explicit DivergenceError(std::uint64_t at_step)
      : std::runtime_error("iterate diverged (non-finite) at step " + std::to_string(at_step)),
        step(at_step) {}
  std::uint64_t step;
};

ParamVector averaged_iterate(const IterState& state);
void averaged_iterate_into(const IterState& state, std::span<double> out);

// Optimal constant step for a fine-tune horizon:
// sqrt((1 + d kdp^2) r1^2 / (horizon L^2)).
double tuned_constant_step(const ProblemSpec& spec, double r1, double kdp, std::uint64_t horizon);

// Algorithm skeleton shared by learning and unlearning: `steps` iterations of
// sample (retain-only) -> stochastic gradient -> step -> projection onto
// B(0, R) -> running-average update. The observer runs after every step and
// returns false to stop early (all thresholds passed). Deterministic given
// the rng state.
template <LossOracle L, class Observer>
IterState run_iterative(const UpdateRule& rule, const L& loss, std::span<const double> theta0,
                        std::uint64_t steps, Rng& rng, Observer&& observe) {
  const std::size_t n = loss.dim();
  if (theta0.size() != n)
    throw std::invalid_argument("run_iterative: theta0 has wrong dimension");
  const ProblemSpec& ps = loss.problem();
  const auto& K = kernels::active();

  IterState st;
  st.theta.assign(theta0.begin(), theta0.end());
  st.memory.assign(theta0.begin(), theta0.end());
  st.weight = rule.average_weight(0);
  if (st.weight != 1.0) K.scal(n, st.weight, st.memory.data());

  std::vector<double> grad(n);
  const double r2 = ps.radius * ps.radius;
  for (std::uint64_t t = 0; t < steps; ++t) {
    st.gradient_accesses += loss.sample_gradient(st.theta, rng, grad);
    K.axpy(n, -rule.step_size(t, ps.mu), grad.data(), st.theta.data());
    const double s2 = K.sumsq(n, st.theta.data());
    if (!std::isfinite(s2)) throw DivergenceError(t);
    if (s2 > r2) K.scal(n, ps.radius / std::sqrt(s2), st.theta.data());
    const double w = rule.average_weight(t + 1);
    K.axpy(n, w, st.theta.data(), st.memory.data());
    st.weight += w;
    st.step = t + 1;
    if (!observe(st)) break;
  }
  return st;
}

template <LossOracle L>
IterState run_iterative(const UpdateRule& rule, const L& loss, std::span<const double> theta0,
                        std::uint64_t steps, Rng& rng) {
  return run_iterative(rule, loss, theta0, steps, rng, [](const IterState&) { return true; });
}

}  // namespace unlearn
