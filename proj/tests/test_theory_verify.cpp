#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "unlearn/losses.hpp"
#include "unlearn/theory.hpp"
#include "unlearn/unlearn.hpp"
#include "unlearn/verify.hpp"

using namespace unlearn;

namespace {
ProblemSpec bench_spec(std::size_t dim) { return make_problem(1.0, 25.0, dim); }
const double kOdds = 0.01 / 0.99;
}  // namespace

// --------------------------------------------------------------------------
// theory boundaries

TEST_CASE("trivial boundary examples and affine-in-kdp shape") {
  const ProblemSpec spec = bench_spec(2);
  const ForgetSplit split = make_forget_split(0.01);
  CHECK(theory::trivial_boundary(spec, split, 1.0) == doctest::Approx(1.124).epsilon(1e-3));
  CHECK(theory::trivial_boundary(spec, split, 0.0) ==
        doctest::Approx(kOdds * kOdds * 78.125).epsilon(1e-14));
  CHECK(theory::trivial_boundary(spec, make_forget_split(0.0), 3.0) == 0.0);

  // exact linearity: f(k) - f(0) = k * slope with slope = rf_odds sqrt(d) e0
  const double slope = kOdds * std::sqrt(2.0) * 78.125;
  for (double k : {0.5, 1.0, 7.25, 60.0}) {
    CHECK(theory::trivial_boundary(spec, split, k) - theory::trivial_boundary(spec, split, 0.0) ==
          doctest::Approx(k * slope).epsilon(1e-12));
  }
}

TEST_CASE("inefficient boundary examples") {
  const ProblemSpec spec2 = bench_spec(2);
  CHECK(theory::inefficient_boundary(bench_spec(1), make_forget_split(0.5), 0.0) ==
        doctest::Approx(bench_spec(1).e0).epsilon(1e-15));
  CHECK(theory::inefficient_boundary(spec2, make_forget_split(0.01), 10.0) ==
        doctest::Approx(0.80508).epsilon(1e-4));
  CHECK(theory::inefficient_boundary(spec2, make_forget_split(0.0), 5.0) == 0.0);
  // the min{1, .} clamp engages for large odds
  CHECK(theory::inefficient_boundary(spec2, make_forget_split(0.9), 10.0) ==
        doctest::Approx(spec2.e0).epsilon(1e-15));
}

TEST_CASE("efficient threshold examples") {
  const ProblemSpec spec = bench_spec(2);
  CHECK(theory::efficient_threshold(spec, make_forget_split(0.0), 1.0) == 0.0);
  CHECK(theory::efficient_threshold(spec, make_forget_split(0.01), 1.0) ==
        doctest::Approx(0.047827).epsilon(1e-4));
  // d k^2 >> 1: doubling kdp roughly quadruples the threshold
  const double a = theory::efficient_threshold(spec, make_forget_split(0.01), 40.0);
  const double b = theory::efficient_threshold(spec, make_forget_split(0.01), 80.0);
  CHECK(b / a == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("classification examples and totality") {
  const ProblemSpec spec = bench_spec(2);
  const ForgetSplit split = make_forget_split(0.01);
  CHECK(theory::classify(spec, split, spec.e0, 1.0) == theory::RegimeLabel::LearningTrivial);
  CHECK(theory::classify(spec, split, 10.0, 1.0) == theory::RegimeLabel::Trivial);
  CHECK(theory::classify(spec, split, 1e-6 * spec.e0, 1.0) == theory::RegimeLabel::Inefficient);
  CHECK_THROWS_AS(theory::classify(spec, split, 0.0, 1.0), std::invalid_argument);

  Rng rng(8);
  int counts[5] = {0, 0, 0, 0, 0};
  for (int i = 0; i < 5000; ++i) {
    const double e = std::pow(10.0, -6.0 + 9.0 * rng.next_unit());
    const double k = std::pow(10.0, -2.0 + 4.0 * rng.next_unit());
    const theory::RegimeLabel label = theory::classify(spec, split, e, k);
    ++counts[static_cast<int>(label)];
    // ordering that defines the partition
    if (e >= spec.e0) CHECK(label == theory::RegimeLabel::LearningTrivial);
  }
  // every label except (possibly) Unclassified shows up on this grid
  CHECK(counts[static_cast<int>(theory::RegimeLabel::Trivial)] > 0);
  CHECK(counts[static_cast<int>(theory::RegimeLabel::Efficient)] > 0);
  CHECK(counts[static_cast<int>(theory::RegimeLabel::Inefficient)] > 0);
  CHECK(counts[static_cast<int>(theory::RegimeLabel::LearningTrivial)] > 0);
}

TEST_CASE("boundary orderings") {
  const ProblemSpec spec = bench_spec(2);
  for (double rf : {0.01, 0.2, 0.6}) {
    const ForgetSplit split = make_forget_split(rf);
    for (double k : {0.0, 0.3, 1.0, 10.0, 100.0}) {
      CHECK(theory::inefficient_boundary(spec, split, k) <= spec.e0 * (1.0 + 1e-15));
      const bool below = theory::trivial_boundary(spec, split, k) < spec.e0;
      const bool predicted = split.rf_odds * (split.rf_odds + std::sqrt(2.0) * k) < 1.0;
      CHECK(below == predicted);
    }
  }
  // rf -> 0 sends every boundary to 0
  const ForgetSplit tiny = make_forget_split(1e-9);
  CHECK(theory::trivial_boundary(spec, tiny, 1.0) < 1e-6);
  CHECK(theory::inefficient_boundary(spec, tiny, 1.0) < 1e-6);
  CHECK(theory::efficient_threshold(spec, tiny, 1.0) < 1e-6);
}

TEST_CASE("time upper bounds") {
  const ProblemSpec spec = bench_spec(2);
  const ForgetSplit split = make_forget_split(0.01);
  CHECK(theory::scratch_time_upper(spec, spec.e0) == 0.0);
  CHECK(theory::unlearn_time_upper(spec, split, 1.0, spec.e0) == 0.0);
  CHECK(theory::scratch_time_upper(spec, 1.0) == doctest::Approx(1250.0));
  CHECK(theory::unlearn_time_upper(spec, split, 1.0, spec.e0 / 10.0) ==
        doctest::Approx(0.030609).epsilon(1e-4));
}

// --------------------------------------------------------------------------
// verify: optimum lemmas

TEST_CASE("opt distance check: closed-form case") {
  const ProblemSpec spec = bench_spec(2);
  const ForgetSplit split = make_forget_split(0.2);
  const SyntheticQuadraticLoss loss(spec, make_mixture(1.0, -1.0, 0.2));
  // |E_D[g] - gamma| = rf |g_f - gamma| = 0.2 * 2 -> distance (L/2mu) 0.4 = 5
  CHECK(loss.opt_distance() == doctest::Approx(5.0).epsilon(1e-12));
  const auto report = verify::check_opt_distance(loss, split);
  CHECK(report.passed);
  CHECK(report.max_slack == doctest::Approx(0.25 * 25.0 - 5.0).epsilon(1e-12));

  const ForgetSplit none = make_forget_split(0.0);
  const SyntheticQuadraticLoss same(spec, make_mixture(0.7, -1.0, 0.0));
  CHECK(same.opt_distance() == 0.0);
  CHECK(verify::check_opt_distance(same, none).passed);
}

TEST_CASE("opt loss gap check: closed-form case") {
  const ProblemSpec spec = bench_spec(2);
  const ForgetSplit split = make_forget_split(0.2);
  const SyntheticQuadraticLoss loss(spec, make_mixture(1.0, -1.0, 0.2));
  const auto report = verify::check_opt_loss_gap(loss, split);
  CHECK(report.passed);
  // gap = (mu/2) 5^2 = 12.5 against bound 0.0625 * 625 = 39.0625
  CHECK(report.max_slack == doctest::Approx(39.0625 - 12.5).epsilon(1e-12));
}

TEST_CASE("random-mixture suites pass") {
  const auto dist = verify::opt_distance_suite(100, 2024);
  CHECK(dist.passed);
  CHECK(dist.cases_checked == 100);
  CHECK(dist.max_slack >= 0.0);
  const auto gap = verify::opt_loss_gap_suite(100, 2024);
  CHECK(gap.passed);
  CHECK(gap.cases_checked == 100);
}

// --------------------------------------------------------------------------
// verify: binomial TV

TEST_CASE("binomial pmf sums to one") {
  for (int t : {0, 1, 5, 17, 60}) {
    for (double g : {-1.0, -0.73, 0.0, 0.4, 0.999, 1.0}) {
      const std::vector<double> pmf = verify::binomial_pmf(t, g);
      double sum = 0.0;
      for (double p : pmf) sum += p;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact binomial TV: hand-enumerated cases") {
  CHECK(verify::exact_binomial_tv(12, 0.37, 0.37) == 0.0);
  CHECK(verify::exact_binomial_tv(1, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  // T=2, gamma 0 vs 0.5: pmfs (1/4,1/2,1/4) vs (1/16, 6/16, 9/16)
  CHECK(verify::exact_binomial_tv(2, 0.0, 0.5) == doctest::Approx(0.3125).epsilon(1e-12));
  CHECK(verify::exact_binomial_tv(2, 0.5, 0.0) == doctest::Approx(0.3125).epsilon(1e-12));
  CHECK_THROWS_AS(verify::exact_binomial_tv(61, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("exact binomial TV against an independent direct-power oracle") {
  // For small T the pmf is computable with plain powers and binomial tables.
  const int t = 3;
  const double binom[4] = {1, 3, 3, 1};
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const double g1 = 2.0 * rng.next_unit() - 1.0;
    const double g2 = 2.0 * rng.next_unit() - 1.0;
    const double p1 = 0.5 * (1.0 + g1), p2 = 0.5 * (1.0 + g2);
    double acc = 0.0;
    for (int k = 0; k <= t; ++k) {
      const double a = binom[k] * std::pow(p1, k) * std::pow(1 - p1, t - k);
      const double b = binom[k] * std::pow(p2, k) * std::pow(1 - p2, t - k);
      acc += std::fabs(a - b);
    }
    CHECK(verify::exact_binomial_tv(t, g1, g2) == doctest::Approx(0.5 * acc).epsilon(1e-12));
  }
}

TEST_CASE("TV is symmetric and bounded by one") {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const int t = 1 + static_cast<int>(rng.next_below(30));
    const double g1 = 2.0 * rng.next_unit() - 1.0;
    const double g2 = 2.0 * rng.next_unit() - 1.0;
    const double tv = verify::exact_binomial_tv(t, g1, g2);
    CHECK(tv >= 0.0);
    CHECK(tv <= 1.0 + 1e-15);
    CHECK(tv == doctest::Approx(verify::exact_binomial_tv(t, g2, g1)).epsilon(1e-14));
    if (g1 != g2) CHECK(tv > 0.0);
  }
}

TEST_CASE("arctan bound holds over the grid (T <= 30)") {
  // spot example first: T=1, gamma 0 vs 1
  const double bound = 0.5 * std::fabs(std::asin(1.0) - std::asin(0.0));
  CHECK(bound == doctest::Approx(0.7854).epsilon(1e-4));
  CHECK(verify::exact_binomial_tv(1, 0.0, 1.0) <= bound);

  const auto report = verify::check_binomial_tv_bound(30, 50);
  CHECK(report.passed);
  CHECK(report.max_slack >= 0.0);
  CHECK(report.cases_checked == 30u * (50u * 51u / 2u));
}

TEST_CASE("lemma reports are reproducible bit-exactly") {
  const auto a = verify::check_binomial_tv_bound(12, 21);
  const auto b = verify::check_binomial_tv_bound(12, 21);
  CHECK(a.max_slack == b.max_slack);
  CHECK(a.cases_checked == b.cases_checked);

  const auto c = verify::opt_distance_suite(40, 99);
  const auto d = verify::opt_distance_suite(40, 99);
  CHECK(c.max_slack == d.max_slack);
  const auto e = verify::opt_distance_suite(40, 100);
  CHECK(c.max_slack != e.max_slack);
}

// --------------------------------------------------------------------------
// verify: gaussian mechanism TV and fine-tune rate

TEST_CASE("gaussian TV vs DP bound: spot values and the default grid") {
  // eps = 1, delta = 0.05: kdp ~ 2.5373, TV = 2 Phi(1/(2 kdp)) - 1 ~ 0.1562
  const PrivacyBudget b = make_privacy_budget(1.0, 0.05);
  const double tv = 2.0 * verify::normal_cdf(0.5 / b.kdp) - 1.0;
  CHECK(tv == doctest::Approx(0.1562).epsilon(1e-3));
  CHECK(tv <= std::exp(1.0) - 1.0 + 0.05);

  const PrivacyBudget large_eps = make_privacy_budget(20.0, 0.05);  // kdp -> small, TV -> 1
  CHECK(2.0 * verify::normal_cdf(0.5 / large_eps.kdp) - 1.0 <= std::expm1(20.0) + 0.05);

  const auto report = verify::default_gaussian_tv_dp();
  CHECK(report.passed);
  CHECK(report.cases_checked == 48);
  CHECK(report.max_slack >= 0.0);
}

TEST_CASE("finetune-rate check: degenerate and standard cases") {
  // rf = 0 and kdp = 0: tuned step is 0, the iterate never moves, excess 0
  const auto degenerate = verify::check_finetune_rate(
      bench_spec(2), make_forget_split(0.0), 0.0, std::vector<std::uint64_t>{10, 100}, 10, 5);
  CHECK(degenerate.passed);
  CHECK(degenerate.max_slack >= -1e-12);

  const std::vector<std::uint64_t> horizons = {1000, 2000, 10000};
  const auto report =
      verify::check_finetune_rate(bench_spec(2), make_forget_split(0.01), 1.0, horizons, 50, 6);
  CHECK(report.passed);
  CHECK(report.cases_checked == 150);
}

TEST_CASE("finetune-rate: empirical means respect the bound ordering in T") {
  const ProblemSpec spec = bench_spec(2);
  const ForgetSplit split = make_forget_split(0.01);
  const Sensitivity sens = theoretical_sensitivity(spec, split);
  auto mean_at = [&](std::uint64_t horizon, double& se_out) {
    const SyntheticQuadraticLoss loss(
        spec, make_hard_mixture(0.5 / std::sqrt(static_cast<double>(horizon)), split.rf));
    const UnlearnPlan plan = make_unlearn_plan(
        PrivacyBudget::from_kdp(1.0), sens, horizon,
        UpdateRule::constant(tuned_constant_step(spec, sens.value, 1.0, horizon)));
    const ParamVector theta_star = loss.full_optimum();
    double sum = 0.0, sq = 0.0;
    const int reps = 50;
    for (int rep = 0; rep < reps; ++rep) {
      Rng rng = Rng::stream(808, {horizon, static_cast<std::uint64_t>(rep)});
      const IterState st = noise_and_finetune(theta_star, loss, plan, rng);
      const double v = loss.retain_excess(averaged_iterate(st));
      sum += v;
      sq += v * v;
    }
    const double mean = sum / reps;
    se_out = std::sqrt(std::max(0.0, sq / reps - mean * mean) / (reps - 1.0));
    return mean;
  };
  double se1 = 0.0, se2 = 0.0;
  const double m1 = mean_at(2000, se1);
  const double m2 = mean_at(4000, se2);
  CHECK(m2 <= m1 + 3.0 * std::sqrt(se1 * se1 + se2 * se2));
}
