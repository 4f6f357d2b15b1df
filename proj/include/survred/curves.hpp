#pragma once

#include <vector>

#include "survred/estimators.hpp"

namespace survred {

// Per-subject survival curve on the cut grid. PEM curves carry the
// piecewise-constant hazards and interpolate exponentially between knots;
// DT and product-limit curves hold their value within each interval.
struct SurvivalCurve {
  enum class Interp { step, exponential };
  Interp interp = Interp::step;
  std::vector<double> knots;    // a_1..a_J
  std::vector<double> values;   // S(a_j), starting from S(0) = 1
  std::vector<double> hazards;  // per-interval hazard rate (exponential only)

  double operator()(double tau) const;
  StepFunction as_step() const;

  static SurvivalCurve from_step(const StepFunction& f);
  static SurvivalCurve from_hazards(const std::vector<double>& cuts,
                                    const std::vector<double>& hazard_rates);
};

// Restricted mean survival time: integral of S over [0, tau], computed
// exactly from the segment representation.
double rmst(const SurvivalCurve& curve, double tau);
double rmst(const StepFunction& survival, double tau);

}  // namespace survred
