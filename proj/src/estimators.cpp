#include "survred/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "survred/error.hpp"

namespace survred {

double StepFunction::operator()(double t) const {
  auto it = std::upper_bound(knots.begin(), knots.end(), t);
  if (it == knots.begin()) return left_value;
  return values[static_cast<size_t>(it - knots.begin()) - 1];
}

double StepFunction::eval_left(double t) const {
  auto it = std::lower_bound(knots.begin(), knots.end(), t);
  if (it == knots.begin()) return left_value;
  return values[static_cast<size_t>(it - knots.begin()) - 1];
}

namespace {

void check_input(const std::vector<double>& times, const std::vector<int>& status) {
  if (times.empty()) throw DataError("empty input");
  if (times.size() != status.size()) throw DataError("times and status must have equal length");
  for (double t : times)
    if (!(t > 0)) throw DataError("times must be positive");
  for (int s : status)
    if (s != 0 && s != 1) throw DataError("status must be 0 or 1");
}

// Shared product-limit machinery. Jumps happen where status == target; the
// at-risk count at a jump time is #{t_i >= t}, i.e. the target event type
// goes first within ties.
StepFunction product_limit(const std::vector<double>& times, const std::vector<int>& status,
                           int target, bool cumulative_hazard) {
  check_input(times, status);
  const size_t n = times.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return times[a] < times[b]; });

  StepFunction f;
  f.left_value = cumulative_hazard ? 0.0 : 1.0;
  double surv = 1.0, cumhaz = 0.0;
  size_t i = 0;
  while (i < n) {
    double t = times[order[i]];
    size_t at_risk = n - i;
    int d = 0;
    size_t j = i;
    while (j < n && times[order[j]] == t) {
      if (status[order[j]] == target) ++d;
      ++j;
    }
    if (d > 0) {
      double frac = static_cast<double>(d) / static_cast<double>(at_risk);
      surv *= 1.0 - frac;
      cumhaz += frac;
      f.knots.push_back(t);
      f.values.push_back(cumulative_hazard ? cumhaz : surv);
    }
    i = j;
  }
  return f;
}

}  // namespace

StepFunction kaplan_meier(const std::vector<double>& times, const std::vector<int>& status) {
  return product_limit(times, status, 1, false);
}

StepFunction censoring_km(const std::vector<double>& times, const std::vector<int>& status) {
  return product_limit(times, status, 0, false);
}

StepFunction nelson_aalen(const std::vector<double>& times, const std::vector<int>& status) {
  return product_limit(times, status, 1, true);
}

void write_step_csv(std::ostream& out, const StepFunction& f, const std::string& estimator) {
  out << "# estimator: " << estimator << "\n";
  out << "# ties: own event type first within tied times\n";
  out << "# left_value: " << format_number(f.left_value) << "\n";
  out << "knot,value\n";
  for (size_t i = 0; i < f.knots.size(); ++i)
    out << format_number(f.knots[i]) << ',' << format_number(f.values[i]) << '\n';
}

StepFunction read_step_csv(std::istream& in) {
  StepFunction f;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("#", 0) == 0) {
      auto pos = line.find("left_value:");
      if (pos != std::string::npos) {
        double v;
        if (parse_number(line.substr(pos + 11), v)) f.left_value = v;
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError("malformed step-function CSV line: " + line);
    double k, v;
    if (!parse_number(line.substr(0, comma), k) || !parse_number(line.substr(comma + 1), v))
      throw DataError("malformed step-function CSV line: " + line);
    f.knots.push_back(k);
    f.values.push_back(v);
  }
  return f;
}

Matrix Matrix::identity(int size) {
  Matrix m(size);
  for (int i = 0; i < size; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix Matrix::mul(const Matrix& rhs) const {
  Matrix out(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double v = at(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < n; ++j) out.at(i, j) += v * rhs.at(k, j);
    }
  return out;
}

Matrix TransitionMatrixPath::eval(double tau) const {
  auto it = std::upper_bound(knots.begin(), knots.end(), tau);
  if (it == knots.begin()) return Matrix::identity(static_cast<int>(states.size()));
  return matrices[static_cast<size_t>(it - knots.begin()) - 1];
}

double TransitionMatrixPath::probability(int from, int to, double tau) const {
  return eval(tau).at(from, to);
}

StepFunction TransitionMatrixPath::cif(int state) const {
  StepFunction f;
  f.left_value = 0.0;
  f.knots = knots;
  f.values.reserve(matrices.size());
  for (const auto& m : matrices) f.values.push_back(m.at(0, state));
  return f;
}

namespace {

struct Episode {
  int from, to;
  double entry, exit;
  int status;
};

std::vector<Episode> episodes_of(const SurvivalTask& task, std::vector<std::string>& states) {
  std::vector<Episode> eps;
  if (task.kind == TaskKind::multi_state) {
    states = task.state_graph->states;
    for (const auto& e : task.episodes)
      eps.push_back({e.from_state, e.to_state, e.entry, e.exit, e.status});
  } else {
    // single-event / competing-risks recast: state 0 transient, causes absorbing
    states.push_back("0");
    if (task.kind == TaskKind::competing_risks) {
      for (const auto& label : task.cause_labels) states.push_back(label);
    } else {
      states.push_back("1");
    }
    for (const auto& r : task.records) {
      int to = r.status == 1 ? std::max(1, r.cause) : 1;
      eps.push_back({0, to, r.entry, r.time, r.status});
    }
  }
  return eps;
}

}  // namespace

TransitionMatrixPath aalen_johansen(const SurvivalTask& task) {
  TransitionMatrixPath path;
  auto eps = episodes_of(task, path.states);
  if (eps.empty()) throw DataError("empty task");
  const int ns = static_cast<int>(path.states.size());

  std::vector<double> event_times;
  for (const auto& e : eps)
    if (e.status == 1) event_times.push_back(e.exit);
  std::sort(event_times.begin(), event_times.end());
  event_times.erase(std::unique(event_times.begin(), event_times.end()), event_times.end());

  Matrix p = Matrix::identity(ns);
  for (double u : event_times) {
    std::vector<double> at_risk(static_cast<size_t>(ns), 0.0);
    Matrix counts(ns);
    for (const auto& e : eps) {
      if (e.entry < u && u <= e.exit) at_risk[static_cast<size_t>(e.from)] += 1.0;
      if (e.status == 1 && e.exit == u) counts.at(e.from, e.to) += 1.0;
    }
    Matrix incr = Matrix::identity(ns);
    for (int o = 0; o < ns; ++o) {
      double total = 0.0;
      for (int l = 0; l < ns; ++l) {
        if (l == o) continue;
        double c = counts.at(o, l);
        if (c == 0.0) continue;
        if (at_risk[static_cast<size_t>(o)] <= 0.0)
          throw DataError("transition recorded at time " + format_number(u) + " from state " +
                          path.states[static_cast<size_t>(o)] + " with no subjects at risk");
        double h = c / at_risk[static_cast<size_t>(o)];
        incr.at(o, l) = h;
        total += h;
      }
      incr.at(o, o) = 1.0 - total;
    }
    p = p.mul(incr);
    path.knots.push_back(u);
    path.matrices.push_back(p);
  }
  return path;
}

}  // namespace survred
