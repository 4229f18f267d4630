#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "unlearn/core_model.hpp"
#include "unlearn/losses.hpp"

namespace unlearn::verify {

// Outcome of one numerical lemma check. max_slack is the worst margin over
// all cases (bound minus observed, minimized); passed iff it is not below
// -tolerance for the check's tolerance.
struct LemmaReport {
  std::string lemma_id;
  std::uint64_t cases_checked = 0;
  double max_slack = 0.0;
  bool passed = false;
};

// |theta* - theta_r*| <= rf_odds L / mu, exact optima.
template <class L>
LemmaReport check_opt_distance(const L& loss, const ForgetSplit& split) {
  const ProblemSpec& ps = loss.problem();
  const double bound = split.rf_odds * ps.lipschitz / ps.mu;
  LemmaReport r{"opt_distance", 1, bound - loss.opt_distance(), false};
  r.passed = r.max_slack >= -1e-12;
  return r;
}

// L_r(theta*) - L_r* <= rf_odds^2 L^2 / mu.
template <class L>
LemmaReport check_opt_loss_gap(const L& loss, const ForgetSplit& split) {
  const ProblemSpec& ps = loss.problem();
  const double bound = split.rf_odds * split.rf_odds * ps.lipschitz * ps.lipschitz / ps.mu;
  const ParamVector full = loss.full_optimum();
  LemmaReport r{"opt_loss_gap", 1, bound - loss.retain_excess(full), false};
  r.passed = r.max_slack >= -1e-12;
  return r;
}

// Sweeps over random (gamma, g_forget, rf, d) mixtures, both synthetic
// variants.
LemmaReport opt_distance_suite(int cases, std::uint64_t seed);
LemmaReport opt_loss_gap_suite(int cases, std::uint64_t seed);

// Binomial pmf at success probability (1+gamma)/2, stable log-space
// evaluation; sums to 1 within 1e-12 for every T <= 60.
std::vector<double> binomial_pmf(int t, double gamma);

// Exact total variation between Bin(T, (1+gamma)/2) and Bin(T, (1+gamma')/2)
// by enumeration; T <= 60 or std::invalid_argument points at the arctan bound.
double exact_binomial_tv(int t, double gamma, double gamma_p);

// exact TV <= (sqrt(T)/2) |asin(gamma') - asin(gamma)| + 1e-9 over a
// [-0.999, 0.999] grid, every T <= t_max.
LemmaReport check_binomial_tv_bound(int t_max, int grid_size);

// For the calibrated noise-only unlearner the worst-case output TV is
// 2 Phi(1/(2 kdp)) - 1; asserts it is <= e^eps - 1 + delta per budget.
LemmaReport check_gaussian_tv_dp(std::span<const PrivacyBudget> budgets);
LemmaReport default_gaussian_tv_dp();

// Monte Carlo check of the fine-tune rate: mean excess of noise+fine-tune
// with the tuned constant step <= L R1 sqrt(1 + d kdp^2) / sqrt(T) plus
// 3 pooled standard errors, at each horizon.
LemmaReport check_finetune_rate(const ProblemSpec& spec, const ForgetSplit& split, double kdp,
                                std::span<const std::uint64_t> horizons, int reps,
                                std::uint64_t seed);

double normal_cdf(double x);

}  // namespace unlearn::verify
