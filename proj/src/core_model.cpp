#include "unlearn/core_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace unlearn {

ProblemSpec make_problem(double mu, double lipschitz, std::size_t dim) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("make_problem: mu must be > 0");
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz))
    throw std::invalid_argument("make_problem: lipschitz must be > 0");
  if (dim < 1) throw std::invalid_argument("make_problem: dim must be >= 1");
  ProblemSpec p;
  p.mu = mu;
  p.lipschitz = lipschitz;
  p.dim = dim;
  p.radius = lipschitz / (2.0 * mu);
  p.e0 = lipschitz * lipschitz / (8.0 * mu);
  return p;
}

ForgetSplit make_forget_split(double rf) {
  if (!(rf >= 0.0) || !(rf < 1.0))
    throw std::invalid_argument("make_forget_split: rf must be in [0, 1)");
  ForgetSplit s;
  s.rf = rf;
  s.rf_odds = rf / (1.0 - rf);
  return s;
}

double derive_kdp(double epsilon, double delta) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("derive_kdp: epsilon must be > 0");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("derive_kdp: delta must be in (0, 1)");
  return std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
}

PrivacyBudget make_privacy_budget(double epsilon, double delta) {
  PrivacyBudget b;
  b.epsilon = epsilon;
  b.delta = delta;
  b.kdp = derive_kdp(epsilon, delta);
  return b;
}

PrivacyBudget PrivacyBudget::from_kdp(double kdp, double delta) {
  if (!(kdp >= 0.0) || !std::isfinite(kdp))
    throw std::invalid_argument("PrivacyBudget::from_kdp: kdp must be >= 0");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("PrivacyBudget::from_kdp: delta must be in (0, 1)");
  PrivacyBudget b;
  b.delta = delta;
  // kdp == 0 means no privacy constraint; the induced epsilon is infinite
  b.epsilon = kdp > 0.0 ? std::sqrt(2.0 * std::log(1.25 / delta)) / kdp
                        : std::numeric_limits<double>::infinity();
  b.kdp = kdp;  // stored exactly as requested; epsilon is the induced budget
  return b;
}

void validate_run_config(const RunConfig& cfg) {
  if (cfg.n_reps < 1) throw std::invalid_argument("RunConfig: n_reps must be >= 1");
  if (cfg.thresholds.empty()) throw std::invalid_argument("RunConfig: thresholds must be nonempty");
  double prev = std::numeric_limits<double>::infinity();
  for (double e : cfg.thresholds) {
    if (!(e > 0.0) || !std::isfinite(e))
      throw std::invalid_argument("RunConfig: thresholds must be strictly positive");
    if (!(e < prev))
      throw std::invalid_argument("RunConfig: thresholds must be strictly decreasing");
    prev = e;
  }
  for (double k : cfg.kdp_grid) {
    if (!(k >= 0.0) || !std::isfinite(k))
      throw std::invalid_argument("RunConfig: kdp grid values must be >= 0");
  }
}

}  // namespace unlearn
