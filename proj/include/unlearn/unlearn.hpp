#pragma once

#include <cstdint>
#include <span>

#include "unlearn/core_model.hpp"
#include "unlearn/losses.hpp"
#include "unlearn/optim.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

// Bound or measurement of the optimum shift |theta* - theta_r*| that the
// Gaussian mechanism must hide.
struct Sensitivity {
  SensitivityMode mode = SensitivityMode::theoretical;
  double value = 0.0;
};

// theoretical bound: rf_odds * L / mu
Sensitivity theoretical_sensitivity(const ProblemSpec& spec, const ForgetSplit& split);

template <class L>
Sensitivity measured_sensitivity(const L& loss) {
  return Sensitivity{SensitivityMode::measured, loss.opt_distance()};
}

struct UnlearnPlan {
  PrivacyBudget budget;
  Sensitivity sensitivity;
  double noise_sigma = 0.0;  // budget.kdp * sensitivity.value
  std::uint64_t finetune_steps = 0;
  UpdateRule rule = UpdateRule::finetune();
};

double calibrate_noise(const PrivacyBudget& budget, const Sensitivity& sens);

UnlearnPlan make_unlearn_plan(PrivacyBudget budget, Sensitivity sens,
                              std::uint64_t finetune_steps, UpdateRule rule);

// theta* + isotropic Gaussian noise with per-coordinate std sigma. sigma == 0
// consumes no randomness, so a zero-noise plan leaves the rng stream where a
// plain fine-tune run expects it.
ParamVector noise_only_unlearn(std::span<const double> theta_star, const UnlearnPlan& plan,
                               Rng& rng);

// Draw the mechanism noise once, then fine-tune on retain samples.
template <LossOracle L, class Observer>
IterState noise_and_finetune(std::span<const double> theta_star, const L& loss,
                             const UnlearnPlan& plan, Rng& rng, Observer&& observe) {
  const ParamVector start = noise_only_unlearn(theta_star, plan, rng);
  return run_iterative(plan.rule, loss, start, plan.finetune_steps, rng,
                       std::forward<Observer>(observe));
}

template <LossOracle L>
IterState noise_and_finetune(std::span<const double> theta_star, const L& loss,
                             const UnlearnPlan& plan, Rng& rng) {
  return noise_and_finetune(theta_star, loss, plan, rng, [](const IterState&) { return true; });
}

// Excess-risk level above which adding calibrated noise alone already meets
// the target: rf_odds (rf_odds + sqrt(d) kdp) e0.
double trivial_regime_excess(const ProblemSpec& spec, const ForgetSplit& split, double kdp);

}  // namespace unlearn
