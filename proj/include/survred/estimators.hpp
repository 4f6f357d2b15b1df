#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "survred/survdata.hpp"

namespace survred {

// Right-continuous piecewise-constant function on [0, inf).
// Value is left_value before the first knot and values.back() beyond the last.
struct StepFunction {
  std::vector<double> knots;   // strictly increasing
  std::vector<double> values;  // value on [knots[i], knots[i+1])
  double left_value = 1.0;

  double operator()(double t) const;
  double eval_left(double t) const;  // left limit at t
  bool empty() const { return knots.empty(); }
};

// Product-limit estimator over unique event times. Tie convention: at equal
// times, jumps of the estimated event type use the full risk set
// #{t_i >= t} (events precede censorings for the survival estimator, the
// mirrored convention for the censoring estimator).
StepFunction kaplan_meier(const std::vector<double>& times, const std::vector<int>& status);

// Kaplan-Meier with the status flipped: censorings are the events.
StepFunction censoring_km(const std::vector<double>& times, const std::vector<int>& status);

// Cumulative hazard H(t) = sum over event times <= t of d_j / n_j.
StepFunction nelson_aalen(const std::vector<double>& times, const std::vector<int>& status);

void write_step_csv(std::ostream& out, const StepFunction& f, const std::string& estimator);
StepFunction read_step_csv(std::istream& in);

// Small dense square matrix for transition paths.
struct Matrix {
  int n = 0;
  std::vector<double> a;

  Matrix() = default;
  explicit Matrix(int size) : n(size), a(static_cast<size_t>(size) * size, 0.0) {}
  static Matrix identity(int size);
  double& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
  double at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }
  Matrix mul(const Matrix& rhs) const;
};

// Empirical transition matrix path P(0, u) at each event time u.
struct TransitionMatrixPath {
  std::vector<std::string> states;
  std::vector<double> knots;     // event times
  std::vector<Matrix> matrices;  // P(0, knot_m)

  Matrix eval(double tau) const;  // identity before the first knot
  double probability(int from, int to, double tau) const;
  // CIF_k read off as P_{0k}(0, .) on a competing-risks path
  StepFunction cif(int state) const;
};

TransitionMatrixPath aalen_johansen(const SurvivalTask& task);

}  // namespace survred
