#include "survred/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <set>
#include <thread>
#include <tuple>
#include <unordered_set>

#include "survred/error.hpp"
#include "survred/rng.hpp"

namespace survred {

double harrell_c(const std::vector<double>& risk, const std::vector<double>& times,
                 const std::vector<int>& status) {
  const size_t n = times.size();
  if (risk.size() != n || status.size() != n)
    throw DataError("risk, times and status must have equal length");
  double concordant = 0.0;
  long comparable = 0;
  for (size_t i = 0; i < n; ++i) {
    if (status[i] != 1) continue;
    for (size_t j = 0; j < n; ++j) {
      if (times[i] >= times[j]) continue;
      ++comparable;
      if (risk[i] > risk[j]) concordant += 1.0;
      else if (risk[i] == risk[j]) concordant += 0.5;
    }
  }
  return comparable == 0 ? 0.5 : concordant / static_cast<double>(comparable);
}

double isbs(const std::vector<SurvivalCurve>& curves, const std::vector<double>& times,
            const std::vector<int>& status, const StepFunction& censor_km_train, double tau_max,
            long* dropped) {
  const size_t n = times.size();
  if (curves.size() != n || status.size() != n)
    throw DataError("curves, times and status must have equal length");
  if (!(tau_max > 0)) throw DataError("tau_max must be positive");

  std::set<double> grid_set = {0.0, tau_max};
  for (double t : times)
    if (t <= tau_max) grid_set.insert(t);
  for (const auto& c : curves)
    for (double k : c.knots)
      if (k <= tau_max) grid_set.insert(k);
  std::vector<double> grid(grid_set.begin(), grid_set.end());

  long dropped_terms = 0;
  auto brier = [&](double t) {
    double sum = 0.0;
    long kept = 0;
    double g_t = censor_km_train(t);
    for (size_t i = 0; i < n; ++i) {
      double s = curves[i](t);
      if (times[i] <= t && status[i] == 1) {
        double g = censor_km_train.eval_left(times[i]);
        if (g <= 0.0) {
          ++dropped_terms;
          continue;
        }
        sum += s * s / g;
        ++kept;
      } else if (times[i] > t) {
        if (g_t <= 0.0) {
          ++dropped_terms;
          continue;
        }
        sum += (1.0 - s) * (1.0 - s) / g_t;
        ++kept;
      } else {
        ++kept;  // censored by t: zero contribution, still part of the mass
      }
    }
    return kept > 0 ? sum / static_cast<double>(kept) : 0.0;
  };

  double integral = 0.0;
  double prev_t = grid[0], prev_bs = brier(prev_t);
  for (size_t k = 1; k < grid.size(); ++k) {
    double bs = brier(grid[k]);
    integral += 0.5 * (bs + prev_bs) * (grid[k] - prev_t);
    prev_t = grid[k];
    prev_bs = bs;
  }
  if (dropped) *dropped = dropped_terms;
  return integral / tau_max;
}

double default_tau_max(const std::vector<double>& train_times) {
  if (train_times.empty()) throw DataError("empty time vector");
  std::vector<double> sorted = train_times;
  std::sort(sorted.begin(), sorted.end());
  return quantile_type1(sorted, 0.8);
}

const char* metric_name(Metric m) { return m == Metric::harrell_c ? "harrell-c" : "isbs"; }

Metric metric_from_name(const std::string& s) {
  if (s == "harrell-c") return Metric::harrell_c;
  if (s == "isbs") return Metric::isbs;
  throw ConfigError("unknown metric: " + s + " (expected harrell-c or isbs)");
}

// ---------------------------------------------------------------------------

int default_repeats(int n_events) {
  if (n_events <= 500) return 3;
  if (n_events <= 1000) return 2;
  return 1;
}

ResamplingPlan make_plan(const SurvivalTask& task, int folds, int repeats, uint64_t seed) {
  if (folds < 2) throw ConfigError("resampling needs at least 2 folds");
  if (repeats < 1) throw ConfigError("resampling needs at least 1 repeat");
  auto ids = task.subject_ids();
  if (static_cast<int>(ids.size()) < folds)
    throw DataError("fewer subjects than folds");
  ResamplingPlan plan;
  plan.folds = folds;
  plan.repeats = repeats;
  plan.seed = seed;
  for (const auto& id : ids) plan.assignment[id] = std::vector<int>(static_cast<size_t>(repeats));
  for (int r = 0; r < repeats; ++r) {
    std::vector<std::string> shuffled = ids;
    Rng rng(mix_seed(seed, static_cast<uint64_t>(r)));
    rng.shuffle(shuffled);
    for (size_t i = 0; i < shuffled.size(); ++i)
      plan.assignment[shuffled[i]][static_cast<size_t>(r)] =
          static_cast<int>(i % static_cast<size_t>(folds));
  }
  return plan;
}

std::pair<SurvivalTask, SurvivalTask> split_task(const SurvivalTask& task,
                                                 const ResamplingPlan& plan, int repeat,
                                                 int fold) {
  if (repeat < 0 || repeat >= plan.repeats || fold < 0 || fold >= plan.folds)
    throw ConfigError("repeat or fold index out of range");
  SurvivalTask train, test;
  for (auto* t : {&train, &test}) {
    t->kind = task.kind;
    t->schema = task.schema;
    t->state_graph = task.state_graph;
    t->cause_labels = task.cause_labels;
  }
  auto side = [&](const std::string& id) -> SurvivalTask& {
    auto it = plan.assignment.find(id);
    if (it == plan.assignment.end()) throw DataError("subject missing from resampling plan: " + id);
    return it->second[static_cast<size_t>(repeat)] == fold ? test : train;
  };
  for (const auto& r : task.records) side(r.id).records.push_back(r);
  for (const auto& e : task.episodes) side(e.id).episodes.push_back(e);
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------

BenchLearner default_bench_learner(const std::string& name) {
  BenchLearner b;
  b.name = name;
  if (name == "km") {
    b.km_baseline = true;
    return b;
  }
  if (name == "pem_glm" || name == "pem_gbt") b.reduction = ReductionKind::pem;
  else if (name == "dt_glm" || name == "dt_gbt") b.reduction = ReductionKind::dt;
  else throw ConfigError("unknown benchmark learner: " + name);

  if (name.ends_with("_glm")) {
    b.learner.kind = LearnerSpec::Kind::glm;
    b.learner.ridge = 1e-4;
    b.space = {{"ridge", 1e-6, 10.0, true, false}};
  } else {
    b.learner.kind = LearnerSpec::Kind::gbt;
    b.learner.gbt.learning_rate = 0.1;
    b.learner.gbt.max_depth = 3;
    b.learner.gbt.min_leaf = 20;
    b.learner.gbt.nrounds = 300;
    b.learner.gbt.early_stop_rounds = 50;
    b.space = {{"learning_rate", 0.01, 0.3, true, false},
               {"max_depth", 1, 8, false, true},
               {"min_leaf", 5, 100, true, true},
               {"cuts", 5, 40, false, true}};
  }
  return b;
}

namespace {

void apply_param(BenchLearner& b, const std::string& name, double value) {
  if (name == "ridge") b.learner.ridge = value;
  else if (name == "learning_rate") b.learner.gbt.learning_rate = value;
  else if (name == "max_depth") b.learner.gbt.max_depth = static_cast<int>(value);
  else if (name == "min_leaf") b.learner.gbt.min_leaf = static_cast<int>(value);
  else if (name == "cuts") b.cuts.count = static_cast<int>(value);
  else throw ConfigError("unknown tunable parameter: " + name);
}

double sample_param(const ParamRange& p, Rng& rng) {
  double v;
  if (p.log_scale) {
    if (!(p.lo > 0)) throw ConfigError("log-scale range requires positive bounds");
    v = std::exp(rng.uniform(std::log(p.lo), std::log(p.hi)));
  } else {
    v = rng.uniform(p.lo, p.hi);
  }
  if (p.integer) v = std::floor(v + 0.5);
  return v;
}

struct FittedBench {
  bool km = false;
  StepFunction km_curve;
  FittedReduction reduction;
};

std::vector<double> observed_times(const SurvivalTask& t) {
  std::vector<double> out;
  for (const auto& r : t.records) out.push_back(r.time);
  return out;
}

std::vector<int> observed_status(const SurvivalTask& t) {
  std::vector<int> out;
  for (const auto& r : t.records) out.push_back(r.status);
  return out;
}

FittedBench fit_bench(const BenchLearner& spec, const SurvivalTask& train, uint64_t seed) {
  FittedBench fit;
  if (spec.km_baseline) {
    fit.km = true;
    fit.km_curve = kaplan_meier(observed_times(train), observed_status(train));
    return fit;
  }
  BenchLearner s = spec;
  s.learner.seed = seed;
  CutGrid grid = make_cuts(train, s.cuts);
  fit.reduction = s.reduction == ReductionKind::pem
                      ? pem_fit(train, grid, s.learner, s.formula)
                      : dt_fit(train, grid, s.learner, s.formula);
  return fit;
}

std::vector<SurvivalCurve> bench_curves(const FittedBench& fit, const SurvivalTask& test) {
  std::vector<SurvivalCurve> curves;
  curves.reserve(test.records.size());
  for (const auto& rec : test.records) {
    if (fit.km)
      curves.push_back(SurvivalCurve::from_step(fit.km_curve));
    else
      curves.push_back(predict_survival(fit.reduction, rec.features, &test.schema));
  }
  return curves;
}

double score_bench(const FittedBench& fit, const SurvivalTask& train, const SurvivalTask& test,
                   Metric metric, double tau_max) {
  auto curves = bench_curves(fit, test);
  auto times = observed_times(test);
  auto status = observed_status(test);
  if (metric == Metric::harrell_c) {
    // scalar risk: expected negative restricted mean survival at tau_max
    std::vector<double> risk(curves.size());
    for (size_t i = 0; i < curves.size(); ++i) risk[i] = -rmst(curves[i], tau_max);
    return harrell_c(risk, times, status);
  }
  StepFunction g = censoring_km(observed_times(train), observed_status(train));
  return isbs(curves, times, status, g, tau_max);
}

// mean inner-CV score of one configuration; learner errors yield the worst score
double tune_score(const BenchLearner& cfg, const SurvivalTask& outer_train, Metric metric,
                  uint64_t seed) {
  ResamplingPlan inner = make_plan(outer_train, 3, 1, mix_seed(seed, 0x7u));
  double sum = 0.0;
  int count = 0;
  for (int fold = 0; fold < inner.folds; ++fold) {
    auto [tr, te] = split_task(outer_train, inner, 0, fold);
    if (tr.event_count() == 0 || te.records.empty()) continue;
    try {
      double tau = default_tau_max(observed_times(tr));
      FittedBench f = fit_bench(cfg, tr, mix_seed(seed, static_cast<uint64_t>(fold)));
      sum += score_bench(f, tr, te, metric, tau);
      ++count;
    } catch (const std::exception&) {
      sum += metric == Metric::harrell_c ? 0.0 : 1.0;
      ++count;
    }
  }
  if (count == 0) return metric == Metric::harrell_c ? 0.0 : 1.0;
  return sum / count;
}

BenchLearner tune(const BenchLearner& spec, const SurvivalTask& outer_train, Metric metric,
                  int budget, uint64_t seed) {
  if (budget == 0 || spec.space.empty() || spec.km_baseline) return spec;
  if (budget < 0) budget = 50 * static_cast<int>(spec.space.size());
  BenchLearner best = spec;
  double best_score = metric == Metric::harrell_c ? -1.0 : std::numeric_limits<double>::infinity();
  for (int b = 0; b < budget; ++b) {
    BenchLearner cfg = spec;
    Rng rng(mix_seed(seed, static_cast<uint64_t>(b) + 11));
    for (const auto& p : spec.space) apply_param(cfg, p.name, sample_param(p, rng));
    double score = tune_score(cfg, outer_train, metric, mix_seed(seed, static_cast<uint64_t>(b)));
    bool better = metric == Metric::harrell_c ? score > best_score : score < best_score;
    if (better) {
      best_score = score;
      best = cfg;
    }
  }
  return best;
}

}  // namespace

void ScoreTable::write_csv(std::ostream& out) const {
  out << "task,learner,repeat,fold,metric,value,fallback\n";
  for (const auto& r : rows)
    out << csv_quote(r.task) << ',' << csv_quote(r.learner) << ',' << r.repeat << ',' << r.fold
        << ',' << r.metric << ',' << format_number(r.value) << ',' << (r.fallback ? 1 : 0)
        << '\n';
}

void ScoreTable::write_aggregate_csv(std::ostream& out) const {
  out << "task,learner,metric,mean_x100,sd_x100,n,fallbacks\n";
  std::vector<std::tuple<std::string, std::string, std::string>> keys;
  for (const auto& r : rows) {
    auto key = std::make_tuple(r.task, r.learner, r.metric);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [task, learner, metric] : keys) {
    std::vector<double> values;
    long fallbacks = 0;
    for (const auto& r : rows)
      if (r.task == task && r.learner == learner && r.metric == metric) {
        values.push_back(r.value);
        fallbacks += r.fallback ? 1 : 0;
      }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double sd = 0.0;
    if (values.size() > 1) {
      for (double v : values) sd += (v - mean) * (v - mean);
      sd = std::sqrt(sd / static_cast<double>(values.size() - 1));
    }
    out << csv_quote(task) << ',' << csv_quote(learner) << ',' << metric << ','
        << format_number(mean * 100.0) << ',' << format_number(sd * 100.0) << ','
        << values.size() << ',' << fallbacks << '\n';
  }
}

ScoreTable benchmark(const std::vector<std::pair<std::string, SurvivalTask>>& tasks,
                     const std::vector<BenchLearner>& learners, const BenchmarkOptions& options) {
  struct WorkItem {
    size_t task_idx, learner_idx;
    int repeat, fold;
    const ResamplingPlan* plan;
    double tau_max;
  };
  std::vector<ResamplingPlan> plans;
  plans.reserve(tasks.size());
  std::vector<WorkItem> items;
  for (size_t t = 0; t < tasks.size(); ++t) {
    const auto& task = tasks[t].second;
    if (task.kind != TaskKind::single_event)
      throw DataError("the benchmark harness evaluates single-event tasks");
    int repeats = options.repeats > 0 ? options.repeats : default_repeats(task.event_count());
    plans.push_back(make_plan(task, options.folds, repeats,
                              mix_seed(options.seed, static_cast<uint64_t>(t))));
  }
  for (size_t t = 0; t < tasks.size(); ++t)
    for (size_t l = 0; l < learners.size(); ++l)
      for (int r = 0; r < plans[t].repeats; ++r)
        for (int f = 0; f < options.folds; ++f)
          items.push_back({t, l, r, f, &plans[t], options.tau_max});

  std::vector<ScoreRow> results(items.size());
  auto run_item = [&](size_t idx) {
    const WorkItem& it = items[idx];
    const auto& [task_name, task] = tasks[it.task_idx];
    const BenchLearner& spec = learners[it.learner_idx];
    uint64_t seed = mix_seed(mix_seed(options.seed, static_cast<uint64_t>(it.task_idx * 1000 +
                                                                          it.learner_idx)),
                             static_cast<uint64_t>(it.repeat * 100 + it.fold));
    auto [train, test] = split_task(task, *it.plan, it.repeat, it.fold);
    double tau = it.tau_max > 0 ? it.tau_max : default_tau_max(observed_times(train));

    ScoreRow row;
    row.task = task_name;
    row.learner = spec.name;
    row.repeat = it.repeat;
    row.fold = it.fold;
    row.metric = metric_name(options.metric);
    try {
      BenchLearner tuned = tune(spec, train, options.metric, options.budget, seed);
      FittedBench fit = fit_bench(tuned, train, seed);
      row.value = score_bench(fit, train, test, options.metric, tau);
    } catch (const std::exception&) {
      // KM fallback absorbs learner failures
      FittedBench km;
      km.km = true;
      km.km_curve = kaplan_meier(observed_times(train), observed_status(train));
      row.value = score_bench(km, train, test, options.metric, tau);
      row.fallback = true;
    }
    results[idx] = std::move(row);
  };

  int workers = std::max(1, options.workers);
  if (workers == 1) {
    for (size_t i = 0; i < items.size(); ++i) run_item(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          size_t i = next.fetch_add(1);
          if (i >= items.size()) return;
          run_item(i);
        }
      });
    for (auto& th : pool) th.join();
  }

  ScoreTable table;
  table.rows = std::move(results);
  return table;
}

}  // namespace survred
