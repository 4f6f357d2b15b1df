#include "survred/curves.hpp"

#include <algorithm>
#include <cmath>

#include "survred/error.hpp"

namespace survred {

double SurvivalCurve::operator()(double tau) const {
  if (tau < 0) throw DataError("survival curve evaluated at negative time");
  if (knots.empty()) return 1.0;
  if (interp == Interp::step) {
    auto it = std::upper_bound(knots.begin(), knots.end(), tau);
    if (it == knots.begin()) return 1.0;
    return values[static_cast<size_t>(it - knots.begin()) - 1];
  }
  // exponential interpolation: constant hazard within each interval,
  // the last hazard continues beyond the grid
  auto it = std::lower_bound(knots.begin(), knots.end(), tau);
  size_t j = static_cast<size_t>(it - knots.begin());
  if (j >= knots.size()) j = knots.size() - 1;
  double a_prev = j == 0 ? 0.0 : knots[j - 1];
  double s_prev = j == 0 ? 1.0 : values[j - 1];
  if (tau <= a_prev) return s_prev;
  return s_prev * std::exp(-hazards[j] * (tau - a_prev));
}

StepFunction SurvivalCurve::as_step() const {
  StepFunction f;
  f.left_value = 1.0;
  f.knots = knots;
  f.values = values;
  return f;
}

SurvivalCurve SurvivalCurve::from_step(const StepFunction& f) {
  SurvivalCurve c;
  c.interp = Interp::step;
  c.knots = f.knots;
  c.values = f.values;
  return c;
}

SurvivalCurve SurvivalCurve::from_hazards(const std::vector<double>& cuts,
                                          const std::vector<double>& hazard_rates) {
  if (cuts.size() != hazard_rates.size())
    throw DataError("hazard count does not match cut count");
  SurvivalCurve c;
  c.interp = Interp::exponential;
  c.knots = cuts;
  c.hazards = hazard_rates;
  double cumhaz = 0.0, prev = 0.0;
  for (size_t j = 0; j < cuts.size(); ++j) {
    cumhaz += hazard_rates[j] * (cuts[j] - prev);
    c.values.push_back(std::exp(-cumhaz));
    prev = cuts[j];
  }
  return c;
}

double rmst(const SurvivalCurve& curve, double tau) {
  if (!(tau > 0)) throw DataError("rmst horizon must be positive");
  double area = 0.0;
  double a_prev = 0.0, s_prev = 1.0;
  for (size_t j = 0; j <= curve.knots.size(); ++j) {
    bool last_segment = j == curve.knots.size();
    double a_j = last_segment ? tau : std::min(curve.knots[j], tau);
    double width = a_j - a_prev;
    if (width > 0) {
      if (curve.interp == SurvivalCurve::Interp::exponential && !curve.hazards.empty()) {
        double h = curve.hazards[std::min(j, curve.hazards.size() - 1)];
        area += h > 0 ? s_prev * (1.0 - std::exp(-h * width)) / h : s_prev * width;
      } else {
        area += s_prev * width;  // constant within the interval
      }
    }
    if (last_segment || curve.knots[j] >= tau) break;
    a_prev = curve.knots[j];
    s_prev = curve.values[j];
  }
  return area;
}

double rmst(const StepFunction& survival, double tau) {
  return rmst(SurvivalCurve::from_step(survival), tau);
}

}  // namespace survred
