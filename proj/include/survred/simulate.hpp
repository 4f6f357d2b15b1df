#pragma once

#include <cstdint>
#include <string>

#include "survred/survdata.hpp"

namespace survred {

// Synthetic single-event generators. Event times are drawn exactly by
// inverting the cumulative hazard at an Exp(1) deviate; censoring is
// independent uniform, with its upper bound calibrated to the target rate.
struct SimSpec {
  enum class Scenario { constant, breakpoint, tve };
  Scenario scenario = Scenario::constant;
  int n = 1000;
  int p = 1;  // number of feature columns
  double censor_rate = 0.0;
  uint64_t seed = 1;

  // constant: h(t) = rate
  double rate = 1.0;

  // breakpoint: baseline h1 before the break, h2 after, linear effects
  // (0.8, -0.8, 0.5) on the first three features
  double h1 = 0.5;
  double h2 = 1.5;
  double breakpoint = 1.0;

  // tve: h(t|x) = h0 * exp(amplitude * sin(2 pi t / period) * group + beta2 * x2)
  // where `group` is a balanced binary feature. The defaults put a full
  // hazard-ratio cycle inside the typical follow-up window.
  double h0 = 0.8;
  double amplitude = 3.0;
  double period = 1.0;
  double beta2 = 0.5;
};

SurvivalTask simulate(const SimSpec& spec);

SimSpec::Scenario scenario_from_name(const std::string& name);
const char* scenario_name(SimSpec::Scenario s);

}  // namespace survred
