#include "survred/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "survred/error.hpp"
#include "survred/rng.hpp"

namespace survred {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Simpson integral of f over [a, b] with a fixed even subdivision.
template <typename F>
double simpson(F&& f, double a, double b, int intervals) {
  double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Invert a strictly increasing cumulative hazard by bracketing + bisection.
template <typename H>
double invert_cumhaz(H&& cumhaz, double target) {
  double hi = 1.0;
  while (cumhaz(hi) < target) {
    hi *= 2.0;
    if (hi > 1e12) throw NumericError("cumulative hazard inversion failed to bracket");
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (cumhaz(mid) < target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct TveBaseline {
  double amplitude, period;
  double per_period;  // integral of exp(a sin(2 pi u / P)) over one period

  explicit TveBaseline(double a, double p) : amplitude(a), period(p) {
    per_period = simpson([&](double u) { return speed(u); }, 0.0, period, 4096);
  }
  double speed(double u) const { return std::exp(amplitude * std::sin(2.0 * kPi * u / period)); }
  double integral(double t) const {
    double full = std::floor(t / period);
    double rest = t - full * period;
    int steps = std::max(16, static_cast<int>(512 * rest / period) * 2 + 16);
    return full * per_period + simpson([&](double u) { return speed(u); }, 0.0, rest, steps);
  }
};

}  // namespace

SimSpec::Scenario scenario_from_name(const std::string& name) {
  if (name == "constant") return SimSpec::Scenario::constant;
  if (name == "breakpoint") return SimSpec::Scenario::breakpoint;
  if (name == "tve") return SimSpec::Scenario::tve;
  throw ConfigError("unknown simulation scenario: " + name +
                    " (expected constant, breakpoint or tve)");
}

const char* scenario_name(SimSpec::Scenario s) {
  switch (s) {
    case SimSpec::Scenario::constant: return "constant";
    case SimSpec::Scenario::breakpoint: return "breakpoint";
    case SimSpec::Scenario::tve: return "tve";
  }
  return "?";
}

SurvivalTask simulate(const SimSpec& spec) {
  if (spec.n < 1) throw ConfigError("simulation needs n >= 1");
  if (spec.p < 1) throw ConfigError("simulation needs p >= 1");
  if (spec.censor_rate < 0 || spec.censor_rate >= 1)
    throw ConfigError("censoring rate must lie in [0, 1)");

  Rng rng(spec.seed);
  SurvivalTask task;
  task.kind = TaskKind::single_event;
  for (int f = 0; f < spec.p; ++f) {
    FeatureSpec fs;
    fs.name = (spec.scenario == SimSpec::Scenario::tve && f == 0) ? "group"
                                                                  : "x" + std::to_string(f + 1);
    task.schema.push_back(fs);
  }

  TveBaseline tve(spec.amplitude, spec.period);

  std::vector<double> event_times(static_cast<size_t>(spec.n));
  std::vector<std::vector<double>> features(static_cast<size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    std::vector<double> x(static_cast<size_t>(spec.p));
    for (int f = 0; f < spec.p; ++f) {
      if (spec.scenario == SimSpec::Scenario::tve && f == 0)
        x[static_cast<size_t>(f)] = rng.uniform() < 0.5 ? 0.0 : 1.0;
      else
        x[static_cast<size_t>(f)] = rng.normal();
    }
    double target = rng.exponential();
    double y = 0.0;
    switch (spec.scenario) {
      case SimSpec::Scenario::constant:
        y = target / spec.rate;
        break;
      case SimSpec::Scenario::breakpoint: {
        static const double betas[3] = {0.8, -0.8, 0.5};
        double lin = 0.0;
        for (int f = 0; f < std::min(spec.p, 3); ++f)
          lin += betas[f] * x[static_cast<size_t>(f)];
        double mult = std::exp(lin);
        // H(t) = mult * (h1 t) before the break, then mult * (h1 b + h2 (t-b))
        double h_break = spec.h1 * spec.breakpoint * mult;
        y = target <= h_break
                ? target / (spec.h1 * mult)
                : spec.breakpoint + (target - h_break) / (spec.h2 * mult);
        break;
      }
      case SimSpec::Scenario::tve: {
        double g = x[0];
        double lin = spec.p >= 2 ? spec.beta2 * x[1] : 0.0;
        double mult = spec.h0 * std::exp(lin);
        if (g == 0.0) {
          y = target / mult;
        } else {
          y = invert_cumhaz([&](double t) { return mult * tve.integral(t); }, target);
        }
        break;
      }
    }
    event_times[static_cast<size_t>(i)] = std::max(y, 1e-12);
    features[static_cast<size_t>(i)] = std::move(x);
  }

  // calibrate the uniform censoring bound so the expected censored fraction
  // matches the target rate, then draw the censoring times
  double c_max = 0.0;
  if (spec.censor_rate > 0) {
    auto expected_rate = [&](double bound) {
      double s = 0.0;
      for (double y : event_times) s += std::min(y / bound, 1.0);
      return s / static_cast<double>(event_times.size());
    };
    double lo = 1e-9, hi = 1.0;
    while (expected_rate(hi) > spec.censor_rate) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      if (expected_rate(mid) > spec.censor_rate) lo = mid;
      else hi = mid;
    }
    c_max = 0.5 * (lo + hi);
  }

  for (int i = 0; i < spec.n; ++i) {
    SubjectRecord rec;
    rec.id = std::to_string(i + 1);
    double y = event_times[static_cast<size_t>(i)];
    double c = spec.censor_rate > 0 ? rng.uniform(0.0, c_max)
                                    : std::numeric_limits<double>::infinity();
    rec.time = std::min(y, c);
    rec.status = y <= c ? 1 : 0;
    rec.features = features[static_cast<size_t>(i)];
    task.records.push_back(std::move(rec));
  }
  return task;
}

}  // namespace survred
