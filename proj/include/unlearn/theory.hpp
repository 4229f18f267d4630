#pragma once

#include <string_view>

#include "unlearn/core_model.hpp"

namespace unlearn::theory {

// The universal constants of the lower/upper bounds are never pinned
// numerically; they are exposed here (default 1) and all outputs are
// understood up to them.
struct RegimeParams {
  double c_lower = 1.0;   // inefficient-regime constant
  double gamma_eff = 0.5; // target ratio for the efficient regime
  double c_upper = 1.0;   // efficient-regime constant
};

enum class RegimeLabel { Trivial, Efficient, Inefficient, Unclassified, LearningTrivial };

std::string_view to_string(RegimeLabel label);

// rf_odds (rf_odds + sqrt(d) kdp) e0 - noise alone suffices at or above it.
double trivial_boundary(const ProblemSpec& spec, const ForgetSplit& split, double kdp);

// min{1, c rf_odds^2 (1 + kdp^2)} e0 - below it the ratio is Omega(1).
double inefficient_boundary(const ProblemSpec& spec, const ForgetSplit& split, double kdp,
                            const RegimeParams& params = {});

// (c / gamma) rf_odds^2 (1 + d kdp^2) e0 - at or above it the ratio is < gamma.
double efficient_threshold(const ProblemSpec& spec, const ForgetSplit& split, double kdp,
                           const RegimeParams& params = {});

// Total classification of (e, kdp): LearningTrivial for e >= e0, then
// Trivial, then Inefficient, then Efficient, then Unclassified (the gap the
// unpinned constants leave between the bounds).
RegimeLabel classify(const ProblemSpec& spec, const ForgetSplit& split, double e, double kdp,
                     const RegimeParams& params = {});

// Closed-form computing-time upper bounds; 0 when e >= e0.
double scratch_time_upper(const ProblemSpec& spec, double e);
double unlearn_time_upper(const ProblemSpec& spec, const ForgetSplit& split, double kdp, double e);

}  // namespace unlearn::theory
