#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "survred/curves.hpp"
#include "survred/partition.hpp"
#include "survred/reduce_dist.hpp"

namespace survred {

// Harrell's C over comparable pairs {(i,j): t_i < t_j, d_i = 1}. Higher risk
// must mean earlier expected event. Risk ties count 1/2; pairs with tied
// times are excluded. Returns 1/2 when no pair is comparable.
double harrell_c(const std::vector<double>& risk, const std::vector<double>& times,
                 const std::vector<int>& status);

// Integrated survival Brier score on [0, tau_max], censoring-weighted with
// the training-split censoring estimator, trapezoid rule over the union of
// curve knots and observed times. Terms with a zero censoring weight are
// dropped with mass renormalization (count reported via `dropped`).
double isbs(const std::vector<SurvivalCurve>& curves, const std::vector<double>& times,
            const std::vector<int>& status, const StepFunction& censor_km_train, double tau_max,
            long* dropped = nullptr);

// 80th percentile of the training observed times (type-1 quantile).
double default_tau_max(const std::vector<double>& train_times);

enum class Metric { harrell_c, isbs };
const char* metric_name(Metric m);
Metric metric_from_name(const std::string& s);

// ---------------------------------------------------------------------------
// Subject-grouped resampling

struct ResamplingPlan {
  int folds = 3;
  int repeats = 1;
  uint64_t seed = 1;
  // subject id -> fold index per repeat
  std::map<std::string, std::vector<int>> assignment;
};

ResamplingPlan make_plan(const SurvivalTask& task, int folds, int repeats, uint64_t seed);
// 3 repeats for tasks with <= 500 events, 2 with <= 1000, 1 otherwise
int default_repeats(int n_events);

// Splits by subject id; every record or episode of a subject stays on one side.
std::pair<SurvivalTask, SurvivalTask> split_task(const SurvivalTask& task,
                                                 const ResamplingPlan& plan, int repeat,
                                                 int fold);

// ---------------------------------------------------------------------------
// Benchmark harness

struct ParamRange {
  std::string name;  // ridge | learning_rate | max_depth | min_leaf | cuts
  double lo = 0.0;
  double hi = 0.0;
  bool log_scale = false;
  bool integer = false;
};

struct BenchLearner {
  std::string name;
  bool km_baseline = false;
  ReductionKind reduction = ReductionKind::pem;
  LearnerSpec learner;
  FormulaSpec formula;
  CutStrategy cuts = CutStrategy::default_strategy();
  std::vector<ParamRange> space;
};

// built-in roster: km, pem_glm, pem_gbt, dt_glm, dt_gbt
BenchLearner default_bench_learner(const std::string& name);

struct ScoreRow {
  std::string task;
  std::string learner;
  int repeat = 0;
  int fold = 0;
  std::string metric;
  double value = 0.0;
  bool fallback = false;
};

struct ScoreTable {
  std::vector<ScoreRow> rows;
  void write_csv(std::ostream& out) const;
  // Mean (SD) per task, learner and metric, scaled by 100 for readability.
  void write_aggregate_csv(std::ostream& out) const;
};

struct BenchmarkOptions {
  int folds = 3;
  int repeats = 0;  // 0 = event-count rule
  Metric metric = Metric::harrell_c;
  int budget = 0;       // random-search evaluations; 0 = defaults, -1 = 50 per tunable
  double tau_max = 0.0;  // 0 = 80th percentile of training observed times
  uint64_t seed = 1;
  int workers = 1;
};

ScoreTable benchmark(const std::vector<std::pair<std::string, SurvivalTask>>& tasks,
                     const std::vector<BenchLearner>& learners, const BenchmarkOptions& options);

}  // namespace survred
