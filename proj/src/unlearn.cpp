#include "unlearn/unlearn.hpp"

#include <cmath>
#include <stdexcept>

namespace unlearn {

Sensitivity theoretical_sensitivity(const ProblemSpec& spec, const ForgetSplit& split) {
  return Sensitivity{SensitivityMode::theoretical, split.rf_odds * spec.lipschitz / spec.mu};
}

double calibrate_noise(const PrivacyBudget& budget, const Sensitivity& sens) {
  if (sens.value < 0.0) throw std::invalid_argument("calibrate_noise: sensitivity must be >= 0");
  return budget.kdp * sens.value;
}

UnlearnPlan make_unlearn_plan(PrivacyBudget budget, Sensitivity sens,
                              std::uint64_t finetune_steps, UpdateRule rule) {
  UnlearnPlan plan;
  plan.budget = budget;
  plan.sensitivity = sens;
  plan.noise_sigma = calibrate_noise(budget, sens);
  plan.finetune_steps = finetune_steps;
  plan.rule = rule;
  return plan;
}

ParamVector noise_only_unlearn(std::span<const double> theta_star, const UnlearnPlan& plan,
                               Rng& rng) {
  ParamVector out(theta_star.begin(), theta_star.end());
  if (plan.noise_sigma > 0.0) {
    for (double& v : out) v += plan.noise_sigma * rng.next_gaussian();
  }
  return out;
}

double trivial_regime_excess(const ProblemSpec& spec, const ForgetSplit& split, double kdp) {
  const double sd = std::sqrt(static_cast<double>(spec.dim));
  return split.rf_odds * (split.rf_odds + sd * kdp) * spec.e0;
}

}  // namespace unlearn
