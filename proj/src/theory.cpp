#include "unlearn/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "unlearn/unlearn.hpp"

namespace unlearn::theory {

std::string_view to_string(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::Trivial: return "Trivial";
    case RegimeLabel::Efficient: return "Efficient";
    case RegimeLabel::Inefficient: return "Inefficient";
    case RegimeLabel::Unclassified: return "Unclassified";
    case RegimeLabel::LearningTrivial: return "LearningTrivial";
  }
  return "Unclassified";
}

double trivial_boundary(const ProblemSpec& spec, const ForgetSplit& split, double kdp) {
  return trivial_regime_excess(spec, split, kdp);
}

namespace {
void check_params(const RegimeParams& p) {
  if (!(p.c_lower > 0.0) || !(p.c_upper > 0.0))
    throw std::invalid_argument("RegimeParams: constants must be > 0");
  if (!(p.gamma_eff > 0.0) || !(p.gamma_eff < 1.0))
    throw std::invalid_argument("RegimeParams: gamma_eff must be in (0, 1)");
}
}  // namespace

double inefficient_boundary(const ProblemSpec& spec, const ForgetSplit& split, double kdp,
                            const RegimeParams& params) {
  check_params(params);
  const double odds2 = split.rf_odds * split.rf_odds;
  return std::min(1.0, params.c_lower * odds2 * (1.0 + kdp * kdp)) * spec.e0;
}

double efficient_threshold(const ProblemSpec& spec, const ForgetSplit& split, double kdp,
                           const RegimeParams& params) {
  check_params(params);
  const double odds2 = split.rf_odds * split.rf_odds;
  const double d = static_cast<double>(spec.dim);
  return params.c_upper / params.gamma_eff * odds2 * (1.0 + d * kdp * kdp) * spec.e0;
}

RegimeLabel classify(const ProblemSpec& spec, const ForgetSplit& split, double e, double kdp,
                     const RegimeParams& params) {
  if (!(e > 0.0)) throw std::invalid_argument("classify: e must be > 0");
  if (e >= spec.e0) return RegimeLabel::LearningTrivial;
  if (e >= trivial_boundary(spec, split, kdp)) return RegimeLabel::Trivial;
  if (e < inefficient_boundary(spec, split, kdp, params)) return RegimeLabel::Inefficient;
  if (e >= efficient_threshold(spec, split, kdp, params)) return RegimeLabel::Efficient;
  return RegimeLabel::Unclassified;
}

double scratch_time_upper(const ProblemSpec& spec, double e) {
  if (!(e > 0.0)) throw std::invalid_argument("scratch_time_upper: e must be > 0");
  if (e >= spec.e0) return 0.0;
  return 2.0 * spec.lipschitz * spec.lipschitz / (spec.mu * e);
}

double unlearn_time_upper(const ProblemSpec& spec, const ForgetSplit& split, double kdp,
                          double e) {
  if (!(e > 0.0)) throw std::invalid_argument("unlearn_time_upper: e must be > 0");
  if (e >= spec.e0) return 0.0;
  const double odds2 = split.rf_odds * split.rf_odds;
  const double d = static_cast<double>(spec.dim);
  const double ratio = spec.e0 / e;
  return odds2 * (1.0 + d * kdp * kdp) * ratio * ratio;
}

}  // namespace unlearn::theory
