#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "survred/error.hpp"
#include "survred/reduce_point.hpp"
#include "test_util.hpp"

using namespace survred;
using namespace survred::testutil;

TEST_CASE("ipcw labels and weights without censoring") {
  auto task = make_task({1.0, 3.0}, {1, 1});
  IpcwDataset data = ipcw_transform(task, 2.0);
  CHECK(data.labels == std::vector<double>{1.0, 0.0});
  CHECK(data.weights == std::vector<double>{1.0, 1.0});
}

TEST_CASE("ipcw worked example reweights the fully observed") {
  auto task = make_task({1.0, 2.0, 3.0}, {1, 0, 1});
  IpcwDataset data = ipcw_transform(task, 2.5);
  CHECK(data.labels == std::vector<double>{1.0, 0.0, 0.0});
  CHECK(data.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(data.weights[1] == 0.0);  // censored before the horizon
  CHECK(data.weights[2] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("a subject censored exactly at the horizon gets weight zero") {
  auto task = make_task({1.0, 2.5, 3.0}, {1, 0, 1});
  IpcwDataset data = ipcw_transform(task, 2.5);
  CHECK(data.weights[1] == 0.0);
  CHECK(data.labels[1] == 0.0);
  // an event exactly at the horizon counts as e = 1
  auto task2 = make_task({2.5, 3.0}, {1, 1});
  IpcwDataset data2 = ipcw_transform(task2, 2.5);
  CHECK(data2.labels[0] == 1.0);
  // weight zero exactly when censored at or before the horizon
  for (size_t i = 0; i < data.weights.size(); ++i) {
    bool censored_by_tau = data.labels[i] == 0.0 && task.records[i].time <= 2.5;
    CHECK((data.weights[i] == 0.0) == censored_by_tau);
  }
}

TEST_CASE("point reductions with marginal estimators reject left truncation") {
  auto truncated = make_task({1.0, 2.0}, {1, 1}, {0.5, 0.0});
  CHECK_THROWS_AS(ipcw_transform(truncated, 1.5), DataError);
  CHECK_THROWS_AS(crm_targets(truncated), DataError);
}

TEST_CASE("retained ipcw weights are always positive and finite") {
  // under the censorings-first tie convention a retained subject sits in the
  // risk set at every earlier censoring time, so its weight point has
  // G-hat > 0; the zero-denominator error is a guard for ill-formed inputs
  Rng rng(3131);
  for (int rep = 0; rep < 20; ++rep) {
    SurvivalTask task = random_tied_dataset(rng, 4 + static_cast<int>(rng.below(30)), 0.6);
    double tau = 0.2 + rng.exponential();
    IpcwDataset data = ipcw_transform(task, tau);
    for (size_t i = 0; i < data.weights.size(); ++i) {
      if (data.weights[i] == 0.0) continue;
      CHECK(data.weights[i] >= 1.0);
      CHECK(std::isfinite(data.weights[i]));
    }
  }
}

TEST_CASE("intercept-only weighted logistic recovers the weighted mean") {
  Rng rng(21);
  SurvivalTask task = random_tied_dataset(rng, 40);
  double tau = 1.0;
  IpcwDataset data = ipcw_transform(task, tau);
  LearnerSpec spec;
  spec.kind = LearnerSpec::Kind::glm;
  FormulaSpec f = FormulaSpec::no_features(FormulaSpec::TimeForm::omit);
  IpcwFit fit = ipcw_fit(task, tau, spec, f);
  double wmean = 0.0, wsum = 0.0;
  for (size_t i = 0; i < data.labels.size(); ++i) {
    wmean += data.weights[i] * data.labels[i];
    wsum += data.weights[i];
  }
  wmean /= wsum;
  double pi_hat = ipcw_predict_risk(fit, feature_row(task));
  CHECK(pi_hat == doctest::Approx(wmean).epsilon(1e-9));
  // survival estimate is the complement
  CHECK(1.0 - pi_hat == doctest::Approx(1.0 - wmean).epsilon(1e-9));
}

TEST_CASE("with zero censoring the ipcw estimate is the empirical proportion") {
  Rng rng(33);
  for (int rep = 0; rep < 5; ++rep) {
    int n = 10 + static_cast<int>(rng.below(30));
    std::vector<double> t;
    std::vector<int> d(static_cast<size_t>(n), 1);
    for (int i = 0; i < n; ++i) t.push_back(0.1 + rng.exponential());
    auto task = make_task(t, d);
    double tau = 1.0;
    LearnerSpec spec;
    spec.kind = LearnerSpec::Kind::glm;
    IpcwFit fit = ipcw_fit(task, tau, spec, FormulaSpec::no_features(FormulaSpec::TimeForm::omit));
    double frac = 0.0;
    for (double v : t) frac += v <= tau ? 1.0 : 0.0;
    frac /= n;
    if (frac == 0.0 || frac == 1.0) continue;  // separation: nothing to compare
    CHECK(ipcw_predict_risk(fit, {}) == doctest::Approx(frac).epsilon(1e-10));
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("crm pairwise case table") {
  StepFunction km = kaplan_meier({1, 2, 3}, {1, 0, 1});
  // both events, known order
  CHECK(crm_pairwise(1, 1, 2, 1, km) == 1.0);
  CHECK(crm_pairwise(2, 1, 1, 1, km) == 0.0);
  CHECK(crm_pairwise(2, 1, 2, 1, km) == 0.5);
  // event before or at a censoring time
  CHECK(crm_pairwise(1, 1, 1, 0, km) == 1.0);
  CHECK(crm_pairwise(1, 1, 2, 0, km) == 1.0);
  // event after a censoring time: survival ratio
  CHECK(crm_pairwise(2, 1, 1, 0, km) == doctest::Approx(1.0).epsilon(1e-15));  // S(2)/S(1) = 1
  CHECK(crm_pairwise(3, 1, 1, 0, km) == doctest::Approx(0.0).epsilon(1e-15));  // S(3)/S(1) = 0
  // censored pair at the same time
  CHECK(crm_pairwise(1.5, 0, 1.5, 0, km) == 0.5);
}

TEST_CASE("crm antisymmetry holds exactly on random censored data") {
  Rng rng(404);
  for (int rep = 0; rep < 10; ++rep) {
    SurvivalTask task = random_tied_dataset(rng, 5 + static_cast<int>(rng.below(25)));
    auto t = times_of(task);
    auto d = status_of(task);
    StepFunction km = kaplan_meier(t, d);
    for (size_t i = 0; i < t.size(); ++i)
      for (size_t j = 0; j < t.size(); ++j) {
        if (i == j) continue;
        double pij = crm_pairwise(t[i], d[i], t[j], d[j], km);
        double pji = crm_pairwise(t[j], d[j], t[i], d[i], km);
        CHECK(pij + pji == 1.0);  // exact, including degenerate denominators
        CHECK(pij >= 0.0);
        CHECK(pij <= 1.0);
      }
  }
}

TEST_CASE("crm targets on uncensored data are the rank closed form") {
  auto task = make_task({1, 2, 3}, {1, 1, 1});
  CrmDataset data = crm_targets(task);
  CHECK(data.targets == std::vector<double>{1.0, 0.5, 0.0});

  auto two = make_task({1, 2}, {1, 1});
  CHECK(crm_targets(two).targets == std::vector<double>{1.0, 0.0});

  // uncensored distinct times: earliest failure has target 1
  Rng rng(7);
  int n = 12;
  std::vector<double> t;
  std::vector<int> d(static_cast<size_t>(n), 1);
  for (int i = 0; i < n; ++i) t.push_back(1.0 + i * 0.37);
  auto ranked = crm_targets(make_task(t, d));
  for (int i = 0; i < n; ++i)
    CHECK(ranked.targets[static_cast<size_t>(i)] ==
          doctest::Approx(static_cast<double>(n - 1 - i) / (n - 1)).epsilon(1e-15));
}

TEST_CASE("crm targets average to one half") {
  // all censored at one time: total symmetry
  SurvivalTask sym;
  sym.kind = TaskKind::single_event;
  for (int i = 0; i < 4; ++i) {
    SubjectRecord rec;
    rec.id = std::to_string(i);
    rec.time = 2.0;
    rec.status = i == 0 ? 1 : 0;  // validation needs one event
    sym.records.push_back(rec);
  }
  CrmDataset data = crm_targets(sym);
  for (size_t i = 1; i < 4; ++i)
    for (size_t j = i + 1; j < 4; ++j)
      CHECK(data.targets[i] == data.targets[j]);

  Rng rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    SurvivalTask task = random_tied_dataset(rng, 6 + static_cast<int>(rng.below(20)));
    auto targets = crm_targets(task).targets;
    double mean = 0.0;
    for (double r : targets) mean += r;
    mean /= static_cast<double>(targets.size());
    CHECK(mean == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("crm case formulas agree with a conditional monte-carlo oracle") {
  // exponential(1) event times; the survival plug-in is the exact law on a
  // fine grid, and the pairwise scores are checked against direct sampling
  StepFunction s_exp;
  s_exp.left_value = 1.0;
  for (int k = 1; k <= 4000; ++k) {
    double t = 8.0 * k / 4000.0;
    s_exp.knots.push_back(t);
    s_exp.values.push_back(std::exp(-t));
  }
  Rng rng(99);
  const int draws = 400000;

  // case 4: i fails at 1.1, j censored at 0.4
  {
    double t_i = 1.1, t_j = 0.4;
    int wins = 0;
    for (int m = 0; m < draws; ++m) {
      double y_j = t_j + rng.exponential();  // memoryless conditioning
      if (t_i < y_j) ++wins;
    }
    double mc = static_cast<double>(wins) / draws;
    double formula = crm_pairwise(t_i, 1, t_j, 0, s_exp);
    CHECK(formula == doctest::Approx(std::exp(-(t_i - t_j))).epsilon(1e-3));
    CHECK(formula == doctest::Approx(mc).epsilon(0.02));
  }
  // case 6: both censored, t_i = 0.3 <= t_j = 0.9
  {
    double t_i = 0.3, t_j = 0.9;
    int wins = 0;
    for (int m = 0; m < draws; ++m) {
      double y_i = t_i + rng.exponential();
      double y_j = t_j + rng.exponential();
      if (y_i < y_j) ++wins;
    }
    double mc = static_cast<double>(wins) / draws;
    double formula = crm_pairwise(t_i, 0, t_j, 0, s_exp);
    CHECK(formula == doctest::Approx(1.0 - 0.5 * std::exp(-(t_j - t_i))).epsilon(1e-3));
    CHECK(formula == doctest::Approx(mc).epsilon(0.02));
  }
}

TEST_CASE("crm fit and predict run end to end") {
  Rng rng(11);
  SurvivalTask task = random_tied_dataset(rng, 30);
  LearnerSpec spec;
  spec.kind = LearnerSpec::Kind::glm;
  FormulaSpec f;
  f.time = FormulaSpec::TimeForm::omit;
  CrmFit fit = crm_fit(task, spec, f);
  double pred = crm_predict(fit, task.records[0].features);
  CHECK(std::isfinite(pred));
  CHECK_THROWS_AS(crm_targets(make_task({1.0}, {1})), DataError);
}

// ---------------------------------------------------------------------------

TEST_CASE("uncensored pseudo-values have the indicator closed form") {
  Rng rng(808);
  for (int rep = 0; rep < 10; ++rep) {
    int n = 5 + static_cast<int>(rng.below(25));
    std::vector<double> t;
    std::vector<int> d(static_cast<size_t>(n), 1);
    for (int i = 0; i < n; ++i) t.push_back(0.2 + rng.exponential());
    auto task = make_task(t, d);
    double tau = 0.8;
    PvQuantity surv;
    surv.kind = PvKind::survival;
    PseudoValueSet pv = pseudo_values(task, surv, {tau});
    PvQuantity mu;
    mu.kind = PvKind::rmst;
    PseudoValueSet pv_mu = pseudo_values(task, mu, {tau});
    for (int i = 0; i < n; ++i) {
      double expect = t[static_cast<size_t>(i)] > tau ? 1.0 : 0.0;
      CHECK(pv.values[static_cast<size_t>(i)][0] == doctest::Approx(expect).epsilon(1e-10));
      CHECK(pv_mu.values[static_cast<size_t>(i)][0] ==
            doctest::Approx(std::min(t[static_cast<size_t>(i)], tau)).epsilon(1e-10));
    }
  }
}

TEST_CASE("jackknife mean identity holds on censored data") {
  Rng rng(909);
  for (int rep = 0; rep < 8; ++rep) {
    SurvivalTask task = random_tied_dataset(rng, 6 + static_cast<int>(rng.below(30)));
    auto taus = default_pv_grid(task, 5);
    PvQuantity q;
    q.kind = PvKind::survival;
    PseudoValueSet pv = pseudo_values(task, q, taus);
    const double n = static_cast<double>(pv.ids.size());
    StepFunction km = kaplan_meier(times_of(task), status_of(task));
    for (size_t k = 0; k < taus.size(); ++k) {
      double mean_pv = 0.0, mean_loo = 0.0;
      for (size_t i = 0; i < pv.ids.size(); ++i) {
        mean_pv += pv.values[i][k];
        // recover theta^{-i} from the pseudo-value definition
        mean_loo += (n * km(taus[k]) - pv.values[i][k]) / (n - 1.0);
      }
      mean_pv /= n;
      mean_loo /= n;
      double rhs = n * km(taus[k]) - (n - 1.0) * mean_loo;
      CHECK(mean_pv == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("pseudo-value leave-one-out equals direct recomputation") {
  Rng rng(4242);
  SurvivalTask task = random_tied_dataset(rng, 12);
  double tau = 1.0;
  PvQuantity q;
  q.kind = PvKind::survival;
  PseudoValueSet pv = pseudo_values(task, q, {tau});
  const double n = static_cast<double>(task.records.size());
  StepFunction km_full = kaplan_meier(times_of(task), status_of(task));
  for (size_t i = 0; i < task.records.size(); ++i) {
    std::vector<double> t;
    std::vector<int> d;
    for (size_t j = 0; j < task.records.size(); ++j) {
      if (j == i) continue;
      t.push_back(task.records[j].time);
      d.push_back(task.records[j].status);
    }
    double loo = kaplan_meier(t, d)(tau);
    CHECK(pv.values[i][0] == doctest::Approx(n * km_full(tau) - (n - 1) * loo).epsilon(1e-12));
  }
}

TEST_CASE("single-event aalen-johansen pseudo-values specialize to kaplan-meier") {
  Rng rng(5151);
  SurvivalTask task = random_tied_dataset(rng, 15);
  // two-state recast: transient-state occupation equals survival
  SurvivalTask ms;
  ms.kind = TaskKind::multi_state;
  StateGraph g;
  g.add_state("0");
  g.add_state("1");
  g.edges = {{0, 1}};
  ms.state_graph = g;
  ms.schema = task.schema;
  for (const auto& r : task.records)
    ms.episodes.push_back({r.id, 0, 1, 1, 0.0, r.time, r.status, r.features});

  double tau = 1.2;
  PvQuantity surv;
  surv.kind = PvKind::survival;
  PvQuantity trans;
  trans.kind = PvKind::transition;
  trans.from_state = 0;
  trans.to_state = 0;
  PseudoValueSet pv_km = pseudo_values(task, surv, {tau});
  PseudoValueSet pv_aj = pseudo_values(ms, trans, {tau});
  REQUIRE(pv_km.ids.size() == pv_aj.ids.size());
  for (size_t i = 0; i < pv_km.ids.size(); ++i)
    CHECK(pv_km.values[i][0] == doctest::Approx(pv_aj.values[i][0]).epsilon(1e-12));
}

TEST_CASE("pseudo-value preconditions") {
  auto single = make_task({1.0, 2.0}, {1, 1});
  PvQuantity q;
  CHECK_THROWS_AS(pseudo_values(make_task({1.0}, {1}), q, {0.5}), DataError);
  auto truncated = make_task({1.0, 2.0}, {1, 1}, {0.5, 0.0});
  CHECK_THROWS_AS(pseudo_values(truncated, q, {0.5}), DataError);
  PseudoValueSet ok = pseudo_values(single, q, {5.0});
  CHECK(ok.extrapolation_warned);  // horizon beyond the observed range
}

TEST_CASE("default pseudo-value grid uses interior event quantiles") {
  Rng rng(66);
  SurvivalTask task = random_tied_dataset(rng, 50);
  auto taus = default_pv_grid(task, 7);
  CHECK(taus.size() <= 7);
  CHECK(!taus.empty());
  for (size_t k = 1; k < taus.size(); ++k) CHECK(taus[k] > taus[k - 1]);
  double t_max = task.max_observed_time();
  for (double tau : taus) {
    CHECK(tau > 0);
    CHECK(tau <= t_max);
  }
}

TEST_CASE("intercept-only pseudo-value regression recovers the estimator") {
  Rng rng(77);
  SurvivalTask task = random_tied_dataset(rng, 25);
  double tau = 1.0;
  PvQuantity q;
  q.kind = PvKind::survival;
  PseudoValueSet pv = pseudo_values(task, q, {tau});
  LearnerSpec spec;
  spec.kind = LearnerSpec::Kind::glm;
  PvFit fit = pv_fit(pv, spec, FormulaSpec::no_features(FormulaSpec::TimeForm::omit));
  StepFunction km = kaplan_meier(times_of(task), status_of(task));
  CHECK(pv_predict(fit, feature_row(task), tau) == doctest::Approx(km(tau)).epsilon(1e-9));
}

TEST_CASE("stacked horizons produce distinct predictions") {
  Rng rng(88);
  SurvivalTask task = random_tied_dataset(rng, 40);
  auto taus = default_pv_grid(task, 2);
  REQUIRE(taus.size() == 2);
  PvQuantity q;
  q.kind = PvKind::survival;
  PseudoValueSet pv = pseudo_values(task, q, taus);
  LearnerSpec spec;
  spec.kind = LearnerSpec::Kind::glm;
  FormulaSpec f = FormulaSpec::no_features(FormulaSpec::TimeForm::omit);
  PvFit fit = pv_fit(pv, spec, f);
  double a = pv_predict(fit, feature_row(task), taus[0]);
  double b = pv_predict(fit, feature_row(task), taus[1]);
  CHECK(a != b);
  CHECK(a > b);  // survival decreases with the horizon
}

TEST_CASE("pseudo-value predictions clip only when asked") {
  SurvivalTask task = make_task({1, 2, 3, 4}, {1, 1, 0, 1});
  PvQuantity q;
  q.kind = PvKind::survival;
  PseudoValueSet pv = pseudo_values(task, q, {3.5});
  LearnerSpec spec;
  spec.kind = LearnerSpec::Kind::glm;
  FormulaSpec f = FormulaSpec::no_features(FormulaSpec::TimeForm::omit);
  PvFit open = pv_fit(pv, spec, f, false);
  PvFit clipped = pv_fit(pv, spec, f, true);
  double raw = pv_predict(open, feature_row(task), 3.5);
  double cl = pv_predict(clipped, feature_row(task), 3.5);
  CHECK(cl >= 0.0);
  CHECK(cl <= 1.0);
  CHECK(cl == doctest::Approx(std::min(std::max(raw, 0.0), 1.0)));
}

TEST_CASE("transformed datasets export the documented columns") {
  Rng rng(2);
  SurvivalTask task = random_tied_dataset(rng, 10);
  std::ostringstream ipcw_out, crm_out, pv_out;
  export_ipcw_csv(ipcw_transform(task, 1.0), ipcw_out);
  CHECK(ipcw_out.str().rfind("id,label,weight,x1\n", 0) == 0);
  export_crm_csv(crm_targets(task), crm_out);
  CHECK(crm_out.str().rfind("id,target,x1\n", 0) == 0);
  PvQuantity q;
  export_pv_csv(pseudo_values(task, q, {0.5, 1.0}), pv_out);
  CHECK(pv_out.str().rfind("id,tau,pseudo_value,x1\n", 0) == 0);
}
