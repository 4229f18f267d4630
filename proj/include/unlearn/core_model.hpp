#pragma once

#include <cstdint>
#include <vector>

namespace unlearn {

using ParamVector = std::vector<double>;

// Constants of the strongly convex problem class: mu-strong convexity and
// L-Lipschitz losses on the ball B(0, R) with R = L / (2 mu). e0 = L^2 / (8 mu)
// is the excess risk guaranteed at the zero initialization; targets at or
// above it are reached before the first gradient step.
struct ProblemSpec {
  double mu = 0.0;
  double lipschitz = 0.0;
  std::size_t dim = 0;
  double radius = 0.0;  // lipschitz / (2 mu)
  double e0 = 0.0;      // lipschitz^2 / (8 mu)
};

ProblemSpec make_problem(double mu, double lipschitz, std::size_t dim);

// Forget fraction r_f of the data mixture D = r_f D_f + (1 - r_f) D_r, plus
// the derived odds r_f / (1 - r_f) that show up in every bound.
struct ForgetSplit {
  double rf = 0.0;
  double rf_odds = 0.0;
};

ForgetSplit make_forget_split(double rf);

// Gaussian-mechanism budget. kdp = sqrt(2 ln(1.25/delta)) / epsilon is the
// only quantity the rest of the pipeline consumes: the mechanism noise scale
// is kdp times the sensitivity.
struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
  double kdp = 0.0;

  static PrivacyBudget from_kdp(double kdp, double delta = 1e-5);
};

double derive_kdp(double epsilon, double delta);
PrivacyBudget make_privacy_budget(double epsilon, double delta);

enum class SensitivityMode { theoretical, measured };

// Per-sweep run parameters shared by the harness and CLI.
struct RunConfig {
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 0;       // optimizer-step budget per run
  std::uint64_t n_reps = 1;
  std::vector<double> thresholds;    // target excess risks, strictly decreasing
  std::vector<double> kdp_grid;
  SensitivityMode sensitivity_mode = SensitivityMode::theoretical;
};

// Throws std::invalid_argument when thresholds are not strictly positive and
// strictly decreasing or n_reps < 1.
void validate_run_config(const RunConfig& cfg);

}  // namespace unlearn
