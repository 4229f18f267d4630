#include "unlearn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "unlearn/optim.hpp"
#include "unlearn/rng.hpp"
#include "unlearn/unlearn.hpp"

namespace unlearn::verify {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// random problem + mixture, alternating quadratic and experimental variants
struct RandomCase {
  ProblemSpec spec;
  ForgetSplit split;
  double distance = 0.0;
  double loss_gap = 0.0;
};

RandomCase draw_case(Rng& rng, int i) {
  const double mu = 0.5 + 2.0 * rng.next_unit();
  const double lip = 5.0 + 45.0 * rng.next_unit();
  const double gamma = 2.0 * rng.next_unit() - 1.0;
  const double g_forget = 2.0 * rng.next_unit() - 1.0;
  const double rf = 0.6 * rng.next_unit();
  RandomCase c;
  c.split = make_forget_split(rf);
  const RademacherMixture mix = make_mixture(gamma, g_forget, rf);
  if (i % 2 == 0) {
    const std::size_t dims[] = {1, 2, 5};
    c.spec = make_problem(mu, lip, dims[static_cast<std::size_t>(i / 2) % 3]);
    SyntheticQuadraticLoss loss(c.spec, mix);
    c.distance = loss.opt_distance();
    c.loss_gap = loss.retain_excess(loss.full_optimum());
  } else {
    const std::size_t dims[] = {2, 4, 8};
    c.spec = make_problem(mu, lip, dims[static_cast<std::size_t>(i / 2) % 3]);
    SyntheticExperimentalLoss loss(c.spec, mix);
    c.distance = loss.opt_distance();
    c.loss_gap = loss.retain_excess(loss.full_optimum());
  }
  return c;
}

}  // namespace

LemmaReport opt_distance_suite(int cases, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, {0x0d15});
  LemmaReport r{"opt_distance", 0, std::numeric_limits<double>::infinity(), false};
  for (int i = 0; i < cases; ++i) {
    const RandomCase c = draw_case(rng, i);
    const double bound = c.split.rf_odds * c.spec.lipschitz / c.spec.mu;
    r.max_slack = std::min(r.max_slack, bound - c.distance);
    ++r.cases_checked;
  }
  r.passed = r.max_slack >= -1e-12;
  return r;
}

LemmaReport opt_loss_gap_suite(int cases, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, {0x6a9});
  LemmaReport r{"opt_loss_gap", 0, std::numeric_limits<double>::infinity(), false};
  for (int i = 0; i < cases; ++i) {
    const RandomCase c = draw_case(rng, i);
    const double bound =
        c.split.rf_odds * c.split.rf_odds * c.spec.lipschitz * c.spec.lipschitz / c.spec.mu;
    r.max_slack = std::min(r.max_slack, bound - c.loss_gap);
    ++r.cases_checked;
  }
  r.passed = r.max_slack >= -1e-12;
  return r;
}

std::vector<double> binomial_pmf(int t, double gamma) {
  if (t < 0 || t > 60) throw std::invalid_argument("binomial_pmf: T must be in [0, 60]");
  if (!(std::fabs(gamma) <= 1.0)) throw std::invalid_argument("binomial_pmf: |gamma| must be <= 1");
  const double p = 0.5 * (1.0 + gamma);
  std::vector<double> pmf(static_cast<std::size_t>(t) + 1, 0.0);
  if (p == 0.0) {
    pmf.front() = 1.0;
    return pmf;
  }
  if (p == 1.0) {
    pmf.back() = 1.0;
    return pmf;
  }
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double lgt = std::lgamma(static_cast<double>(t) + 1.0);
  for (int k = 0; k <= t; ++k) {
    const double lg = lgt - std::lgamma(static_cast<double>(k) + 1.0) -
                      std::lgamma(static_cast<double>(t - k) + 1.0) +
                      static_cast<double>(k) * lp + static_cast<double>(t - k) * lq;
    pmf[static_cast<std::size_t>(k)] = std::exp(lg);
  }
  return pmf;
}

double exact_binomial_tv(int t, double gamma, double gamma_p) {
  if (t < 0 || t > 60)
    throw std::invalid_argument(
        "exact_binomial_tv: T must be <= 60; use the arctan bound for larger T");
  const std::vector<double> a = binomial_pmf(t, gamma);
  const std::vector<double> b = binomial_pmf(t, gamma_p);
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::fabs(a[k] - b[k]);
  return 0.5 * acc;
}

LemmaReport check_binomial_tv_bound(int t_max, int grid_size) {
  if (t_max < 1 || t_max > 60)
    throw std::invalid_argument("check_binomial_tv_bound: t_max must be in [1, 60]");
  if (grid_size < 2) throw std::invalid_argument("check_binomial_tv_bound: grid_size must be >= 2");
  LemmaReport r{"binomial_tv", 0, std::numeric_limits<double>::infinity(), false};
  std::vector<double> grid(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) {
    grid[static_cast<std::size_t>(i)] =
        -0.999 + 1.998 * static_cast<double>(i) / static_cast<double>(grid_size - 1);
  }
  for (int t = 1; t <= t_max; ++t) {
    const double half_sqrt_t = 0.5 * std::sqrt(static_cast<double>(t));
    std::vector<std::vector<double>> pmfs;
    pmfs.reserve(grid.size());
    for (double g : grid) pmfs.push_back(binomial_pmf(t, g));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = i; j < grid.size(); ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < pmfs[i].size(); ++k) acc += std::fabs(pmfs[i][k] - pmfs[j][k]);
        const double tv = 0.5 * acc;
        const double bound = half_sqrt_t * std::fabs(std::asin(grid[j]) - std::asin(grid[i]));
        r.max_slack = std::min(r.max_slack, bound + 1e-9 - tv);
        ++r.cases_checked;
      }
    }
  }
  r.passed = r.max_slack >= 0.0;
  return r;
}

LemmaReport check_gaussian_tv_dp(std::span<const PrivacyBudget> budgets) {
  LemmaReport r{"gaussian_tv_dp", 0, std::numeric_limits<double>::infinity(), false};
  for (const PrivacyBudget& b : budgets) {
    const double tv = 2.0 * normal_cdf(0.5 / b.kdp) - 1.0;
    const double bound = std::expm1(b.epsilon) + b.delta;
    r.max_slack = std::min(r.max_slack, bound - tv);
    ++r.cases_checked;
  }
  r.passed = r.max_slack >= -1e-12;
  return r;
}

LemmaReport default_gaussian_tv_dp() {
  std::vector<PrivacyBudget> budgets;
  for (int i = 0; i < 8; ++i) {
    const double eps = 0.1 * std::pow(50.0, static_cast<double>(i) / 7.0);  // 0.1 .. 5
    for (int j = 0; j < 6; ++j) {
      const double delta = 1e-6 * std::pow(1e5, static_cast<double>(j) / 5.0);  // 1e-6 .. 0.1
      budgets.push_back(make_privacy_budget(eps, delta));
    }
  }
  return check_gaussian_tv_dp(budgets);
}

LemmaReport check_finetune_rate(const ProblemSpec& spec, const ForgetSplit& split, double kdp,
                                std::span<const std::uint64_t> horizons, int reps,
                                std::uint64_t seed) {
  if (reps < 1) throw std::invalid_argument("check_finetune_rate: reps must be >= 1");
  LemmaReport r{"finetune_rate", 0, std::numeric_limits<double>::infinity(), false};
  const Sensitivity sens = theoretical_sensitivity(spec, split);
  const double d = static_cast<double>(spec.dim);
  for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
    const std::uint64_t horizon = horizons[hi];
    if (horizon == 0) throw std::invalid_argument("check_finetune_rate: horizons must be >= 1");
    const double gamma_r = 0.5 / std::sqrt(static_cast<double>(horizon));
    const SyntheticQuadraticLoss loss(spec, make_hard_mixture(gamma_r, split.rf));
    const ParamVector theta_star = loss.full_optimum();
    const UnlearnPlan plan =
        make_unlearn_plan(PrivacyBudget::from_kdp(kdp), sens, horizon,
                          UpdateRule::constant(tuned_constant_step(spec, sens.value, kdp, horizon)));
    double sum = 0.0, sumsq = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      Rng rng = Rng::stream(seed, {0xf17e, hi, static_cast<std::uint64_t>(rep)});
      const IterState st = noise_and_finetune(theta_star, loss, plan, rng);
      const double excess = loss.retain_excess(averaged_iterate(st));
      sum += excess;
      sumsq += excess * excess;
    }
    const double n = static_cast<double>(reps);
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean);
    const double se = reps > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    const double bound = spec.lipschitz * sens.value * std::sqrt(1.0 + d * kdp * kdp) /
                         std::sqrt(static_cast<double>(horizon));
    r.max_slack = std::min(r.max_slack, bound + 3.0 * se - mean);
    r.cases_checked += static_cast<std::uint64_t>(reps);
  }
  r.passed = r.max_slack >= -1e-12;
  return r;
}

}  // namespace unlearn::verify
