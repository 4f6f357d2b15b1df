#include "survred/reduce_point.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "survred/error.hpp"

namespace survred {

namespace {

DataTable features_table(const std::vector<FeatureSpec>& schema,
                         const std::vector<const std::vector<double>*>& rows) {
  DataTable table;
  table.nrow = rows.size();
  for (size_t f = 0; f < schema.size(); ++f) {
    std::vector<double> values(rows.size());
    for (size_t r = 0; r < rows.size(); ++r) values[r] = (*rows[r])[f];
    if (schema[f].type == FeatureType::categorical)
      table.add_categorical(schema[f].name, std::move(values), schema[f].levels);
    else
      table.add_numeric(schema[f].name, std::move(values));
  }
  return table;
}

std::vector<std::string> feature_mains(const std::vector<FeatureSpec>& schema,
                                       const FormulaSpec& formula) {
  if (formula.all_features) {
    std::vector<std::string> mains;
    for (const auto& fs : schema) mains.push_back(fs.name);
    return mains;
  }
  return formula.features;
}

std::string feature_csv_field(const FeatureSpec& fs, double v) {
  if (fs.type == FeatureType::categorical) return csv_quote(fs.levels[static_cast<size_t>(v)]);
  return format_number(v);
}

}  // namespace

DataTable subject_features(const SurvivalTask& task, std::vector<std::string>* ids_out) {
  std::vector<std::string> ids;
  std::vector<const std::vector<double>*> rows;
  std::unordered_set<std::string> seen;
  for (const auto& r : task.records)
    if (seen.insert(r.id).second) {
      ids.push_back(r.id);
      rows.push_back(&r.features);
    }
  for (const auto& e : task.episodes)
    if (seen.insert(e.id).second) {
      ids.push_back(e.id);
      rows.push_back(&e.features);
    }
  if (ids_out) *ids_out = ids;
  return features_table(task.schema, rows);
}

// ---------------------------------------------------------------------------
// IPCW

IpcwDataset ipcw_transform(const SurvivalTask& task, double tau) {
  if (task.kind != TaskKind::single_event)
    throw DataError("the IPCW reduction requires a single-event task");
  if (!(tau > 0)) throw DataError("the IPCW horizon must be positive");
  for (const auto& r : task.records)
    if (r.entry > 0)
      throw DataError("the IPCW reduction is not applicable to left-truncated data");

  IpcwDataset out;
  out.tau = tau;
  out.schema = task.schema;

  std::vector<double> times;
  std::vector<int> status;
  for (const auto& r : task.records) {
    times.push_back(r.time);
    status.push_back(r.status);
  }
  out.censor_km = censoring_km(times, status);

  std::vector<const std::vector<double>*> rows;
  for (const auto& r : task.records) {
    out.ids.push_back(r.id);
    rows.push_back(&r.features);
    bool event_by_tau = r.time <= tau && r.status == 1;
    out.labels.push_back(event_by_tau ? 1.0 : 0.0);
    if (event_by_tau || r.time > tau) {
      double g = out.censor_km(std::min(r.time, tau));
      if (g <= 0.0)
        throw NumericError("censoring survival estimate is zero at the weight point of subject " +
                           r.id + " (identifiability failure)");
      out.weights.push_back(1.0 / g);
    } else {
      // censored at or before the horizon: status at tau unknown
      out.weights.push_back(0.0);
    }
  }
  out.features = features_table(task.schema, rows);
  return out;
}

IpcwFit ipcw_fit(const SurvivalTask& task, double tau, const LearnerSpec& spec,
                 const FormulaSpec& formula) {
  IpcwDataset data = ipcw_transform(task, tau);
  IpcwFit fit;
  fit.tau = tau;
  fit.censor_km = data.censor_km;
  fit.formula = formula;
  fit.schema = task.schema;
  fit.design.fit(data.features, feature_mains(task.schema, formula), formula.interactions);
  DesignMatrix X = fit.design.transform(data.features);
  fit.model = fit_learner(spec, Objective::logistic, X, data.labels, nullptr, &data.weights);
  return fit;
}

double ipcw_predict_risk(const IpcwFit& fit, const std::vector<double>& x,
                         const std::vector<FeatureSpec>* schema) {
  const std::vector<FeatureSpec>& sch = schema ? *schema : fit.schema;
  if (x.size() != sch.size()) throw DataError("feature vector length does not match the schema");
  DataTable table = features_table(sch, {&x});
  DesignMatrix X = fit.design.transform(table);
  return fit.model.predict_response(X)[0];
}

void export_ipcw_csv(const IpcwDataset& data, std::ostream& out) {
  out << "id,label,weight";
  for (const auto& fs : data.schema) out << ',' << csv_quote(fs.name);
  out << '\n';
  for (size_t i = 0; i < data.ids.size(); ++i) {
    out << csv_quote(data.ids[i]) << ',' << format_number(data.labels[i]) << ','
        << format_number(data.weights[i]);
    for (size_t f = 0; f < data.schema.size(); ++f)
      out << ',' << feature_csv_field(data.schema[f], data.features.cols[f].values[i]);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// CRM

double crm_pairwise(double t_i, int d_i, double t_j, int d_j, const StepFunction& km,
                    long* degenerate_pairs) {
  auto degenerate = [&]() {
    if (degenerate_pairs) ++(*degenerate_pairs);
    return 0.5;
  };
  if (d_i == 1 && d_j == 1) {
    if (t_i < t_j) return 1.0;
    if (t_i > t_j) return 0.0;
    return 0.5;
  }
  if (d_i == 1 && d_j == 0) {
    if (t_i <= t_j) return 1.0;  // j still event-free at t_j >= t_i
    double s_j = km(t_j);
    if (s_j <= 0.0) return degenerate();
    return km(t_i) / s_j;  // P(y_j > t_i | y_j > t_j)
  }
  if (d_i == 0 && d_j == 1) {
    // mirror of the previous case
    if (t_j <= t_i) return 0.0;
    double s_i = km(t_i);
    if (s_i <= 0.0) return 1.0 - degenerate();
    return 1.0 - km(t_j) / s_i;
  }
  // both censored: split into "fails in (t_min, t_max]" and the symmetric tail
  double t_min = std::min(t_i, t_j), t_max = std::max(t_i, t_j);
  double s_min = km(t_min);
  if (s_min <= 0.0) return degenerate();
  double ratio = km(t_max) / s_min;
  return t_i <= t_j ? 1.0 - 0.5 * ratio : 0.5 * ratio;
}

CrmDataset crm_targets(const SurvivalTask& task) {
  if (task.kind != TaskKind::single_event)
    throw DataError("the CRM reduction requires a single-event task");
  const size_t n = task.records.size();
  if (n < 2) throw DataError("CRM targets need at least two subjects");
  for (const auto& r : task.records)
    if (r.entry > 0)
      throw DataError("the CRM reduction is not applicable to left-truncated data");

  CrmDataset out;
  out.schema = task.schema;
  std::vector<double> times(n);
  std::vector<int> status(n);
  std::vector<const std::vector<double>*> rows;
  for (size_t i = 0; i < n; ++i) {
    times[i] = task.records[i].time;
    status[i] = task.records[i].status;
    out.ids.push_back(task.records[i].id);
    rows.push_back(&task.records[i].features);
  }
  out.km = kaplan_meier(times, status);
  out.features = features_table(task.schema, rows);

  out.targets.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum += crm_pairwise(times[i], status[i], times[j], status[j], out.km,
                          &out.degenerate_pairs);
    }
    out.targets[i] = sum / static_cast<double>(n - 1);
  }
  return out;
}

CrmFit crm_fit(const SurvivalTask& task, const LearnerSpec& spec, const FormulaSpec& formula) {
  CrmDataset data = crm_targets(task);
  CrmFit fit;
  fit.formula = formula;
  fit.schema = task.schema;
  fit.design.fit(data.features, feature_mains(task.schema, formula), formula.interactions);
  DesignMatrix X = fit.design.transform(data.features);
  fit.model = fit_learner(spec, Objective::squared, X, data.targets, nullptr, nullptr);
  return fit;
}

double crm_predict(const CrmFit& fit, const std::vector<double>& x,
                   const std::vector<FeatureSpec>* schema) {
  const std::vector<FeatureSpec>& sch = schema ? *schema : fit.schema;
  if (x.size() != sch.size()) throw DataError("feature vector length does not match the schema");
  DataTable table = features_table(sch, {&x});
  return fit.model.predict_response(fit.design.transform(table))[0];
}

void export_crm_csv(const CrmDataset& data, std::ostream& out) {
  out << "id,target";
  for (const auto& fs : data.schema) out << ',' << csv_quote(fs.name);
  out << '\n';
  for (size_t i = 0; i < data.ids.size(); ++i) {
    out << csv_quote(data.ids[i]) << ',' << format_number(data.targets[i]);
    for (size_t f = 0; f < data.schema.size(); ++f)
      out << ',' << feature_csv_field(data.schema[f], data.features.cols[f].values[i]);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Pseudo-values

namespace {

struct PvEstimator {
  const SurvivalTask* task;
  PvQuantity quantity;

  double eval(const SurvivalTask& data, double tau) const {
    switch (quantity.kind) {
      case PvKind::survival:
      case PvKind::rmst: {
        std::vector<double> times;
        std::vector<int> status;
        for (const auto& r : data.records) {
          times.push_back(r.time);
          status.push_back(r.status);
        }
        StepFunction km = kaplan_meier(times, status);
        return quantity.kind == PvKind::survival ? km(tau) : rmst(km, tau);
      }
      case PvKind::cif: {
        auto path = aalen_johansen(data);
        // competing-risks recast: state index k corresponds to cause k
        return path.probability(0, quantity.cause, tau);
      }
      case PvKind::transition: {
        auto path = aalen_johansen(data);
        return path.probability(quantity.from_state, quantity.to_state, tau);
      }
    }
    return 0.0;
  }
};

SurvivalTask drop_subject(const SurvivalTask& task, const std::string& id) {
  SurvivalTask out;
  out.kind = task.kind;
  out.schema = task.schema;
  out.state_graph = task.state_graph;
  out.cause_labels = task.cause_labels;
  for (const auto& r : task.records)
    if (r.id != id) out.records.push_back(r);
  for (const auto& e : task.episodes)
    if (e.id != id) out.episodes.push_back(e);
  return out;
}

}  // namespace

std::vector<double> default_pv_grid(const SurvivalTask& task, int k) {
  if (k < 1) throw ConfigError("pseudo-value grid size must be >= 1");
  std::vector<double> events;
  for (const auto& r : task.records)
    if (r.status == 1) events.push_back(r.time);
  for (const auto& e : task.episodes)
    if (e.status == 1) events.push_back(e.exit);
  if (events.empty()) throw DataError("no event times for the pseudo-value grid");
  std::sort(events.begin(), events.end());
  std::vector<double> taus;
  for (int i = 1; i <= k; ++i)
    taus.push_back(quantile_type1(events, static_cast<double>(i) / (k + 1)));
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
  return taus;
}

PseudoValueSet pseudo_values(const SurvivalTask& task, const PvQuantity& quantity,
                             const std::vector<double>& taus) {
  for (const auto& r : task.records)
    if (r.entry > 0)
      throw DataError("pseudo-values are not applicable to left-truncated data");
  for (const auto& e : task.episodes)
    if (e.from_state == 0 && e.entry > 0)
      throw DataError("pseudo-values are not applicable to left-truncated data");
  if (taus.empty()) throw ConfigError("pseudo-values need at least one evaluation time");
  if (quantity.kind == PvKind::cif && task.kind != TaskKind::competing_risks)
    throw DataError("CIF pseudo-values require a competing-risks task");
  if (quantity.kind == PvKind::transition && task.kind != TaskKind::multi_state)
    throw DataError("transition pseudo-values require a multi-state task");

  PseudoValueSet out;
  out.quantity = quantity;
  out.eval_times = taus;
  out.features = subject_features(task, &out.ids);
  out.schema = task.schema;
  const size_t n = out.ids.size();
  if (n < 2) throw DataError("pseudo-values need at least two subjects (leave-one-out)");

  const double t_max = task.max_observed_time();
  for (double tau : taus) {
    if (!(tau > 0)) throw DataError("pseudo-value horizons must be positive");
    if (tau > t_max) out.extrapolation_warned = true;  // constant extrapolation applies
  }

  PvEstimator est{&task, quantity};
  std::vector<double> full(taus.size());
  for (size_t t = 0; t < taus.size(); ++t) full[t] = est.eval(task, taus[t]);

  out.values.assign(n, std::vector<double>(taus.size(), 0.0));
  const double dn = static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    SurvivalTask reduced = drop_subject(task, out.ids[i]);
    for (size_t t = 0; t < taus.size(); ++t) {
      double loo = est.eval(reduced, taus[t]);
      out.values[i][t] = dn * full[t] - (dn - 1.0) * loo;
    }
  }
  return out;
}

PvFit pv_fit(const PseudoValueSet& pvset, const LearnerSpec& spec, const FormulaSpec& formula,
             bool clip_probabilities) {
  PvFit fit;
  fit.quantity = pvset.quantity;
  fit.taus = pvset.eval_times;
  fit.clip_probabilities = clip_probabilities;
  fit.formula = formula;
  fit.schema = pvset.schema;

  // stacked: replicate feature rows per horizon and add tau as a feature
  const size_t n = pvset.ids.size();
  const size_t k = pvset.eval_times.size();
  DataTable table;
  table.nrow = n * k;
  for (const auto& col : pvset.features.cols) {
    std::vector<double> values(n * k);
    for (size_t i = 0; i < n; ++i)
      for (size_t t = 0; t < k; ++t) values[i * k + t] = col.values[i];
    if (col.type == ColumnType::categorical)
      table.add_categorical(col.name, std::move(values), col.levels);
    else
      table.add_numeric(col.name, std::move(values));
  }
  std::vector<double> y(n * k), tau_col(n * k);
  for (size_t i = 0; i < n; ++i)
    for (size_t t = 0; t < k; ++t) {
      y[i * k + t] = pvset.values[i][t];
      tau_col[i * k + t] = pvset.eval_times[t];
    }
  const bool with_tau = k > 1;
  if (with_tau) table.add_numeric("tau", std::move(tau_col));

  auto mains = feature_mains(pvset.schema, formula);
  if (with_tau) mains.push_back("tau");
  fit.design.fit(table, mains, formula.interactions);
  DesignMatrix X = fit.design.transform(table);
  fit.model = fit_learner(spec, Objective::squared, X, y, nullptr, nullptr);
  return fit;
}

double pv_predict(const PvFit& fit, const std::vector<double>& x, double tau,
                  const std::vector<FeatureSpec>* schema) {
  const std::vector<FeatureSpec>& sch = schema ? *schema : fit.schema;
  if (x.size() != sch.size()) throw DataError("feature vector length does not match the schema");
  DataTable table = features_table(sch, {&x});
  if (fit.taus.size() > 1) table.add_numeric("tau", {tau});
  double v = fit.model.predict_response(fit.design.transform(table))[0];
  if (fit.clip_probabilities && fit.quantity.kind != PvKind::rmst) {
    double clipped = std::min(std::max(v, 0.0), 1.0);
    if (clipped != v) fit.clip_count += 1;
    v = clipped;
  }
  return v;
}

namespace {

const char* pv_kind_name(PvKind k) {
  switch (k) {
    case PvKind::survival: return "survival";
    case PvKind::rmst: return "rmst";
    case PvKind::cif: return "cif";
    case PvKind::transition: return "transition";
  }
  return "?";
}

PvKind pv_kind_from_name(const std::string& s) {
  if (s == "survival") return PvKind::survival;
  if (s == "rmst") return PvKind::rmst;
  if (s == "cif") return PvKind::cif;
  if (s == "transition") return PvKind::transition;
  throw DataError("unknown pseudo-value quantity: " + s);
}

}  // namespace

json ipcw_to_json(const IpcwFit& fit) {
  return json{{"tau", fit.tau},
              {"censor_km", to_json(fit.censor_km)},
              {"formula", to_json(fit.formula)},
              {"schema", schema_to_json(fit.schema)},
              {"design", to_json(fit.design)},
              {"model", to_json(fit.model)}};
}

IpcwFit ipcw_from_json(const json& j) {
  IpcwFit fit;
  fit.tau = j.at("tau").get<double>();
  fit.censor_km = step_from_json(j.at("censor_km"));
  fit.formula = formula_from_json(j.at("formula"));
  fit.schema = schema_from_json(j.at("schema"));
  fit.design = design_from_json(j.at("design"));
  fit.model = learner_model_from_json(j.at("model"));
  return fit;
}

json crm_to_json(const CrmFit& fit) {
  return json{{"formula", to_json(fit.formula)},
              {"schema", schema_to_json(fit.schema)},
              {"design", to_json(fit.design)},
              {"model", to_json(fit.model)}};
}

CrmFit crm_from_json(const json& j) {
  CrmFit fit;
  fit.formula = formula_from_json(j.at("formula"));
  fit.schema = schema_from_json(j.at("schema"));
  fit.design = design_from_json(j.at("design"));
  fit.model = learner_model_from_json(j.at("model"));
  return fit;
}

json pv_to_json(const PvFit& fit) {
  return json{{"quantity", pv_kind_name(fit.quantity.kind)},
              {"cause", fit.quantity.cause},
              {"from", fit.quantity.from_state},
              {"to", fit.quantity.to_state},
              {"taus", fit.taus},
              {"clip", fit.clip_probabilities},
              {"formula", to_json(fit.formula)},
              {"schema", schema_to_json(fit.schema)},
              {"design", to_json(fit.design)},
              {"model", to_json(fit.model)}};
}

PvFit pv_from_json(const json& j) {
  PvFit fit;
  fit.quantity.kind = pv_kind_from_name(j.at("quantity").get<std::string>());
  fit.quantity.cause = j.at("cause").get<int>();
  fit.quantity.from_state = j.at("from").get<int>();
  fit.quantity.to_state = j.at("to").get<int>();
  fit.taus = j.at("taus").get<std::vector<double>>();
  fit.clip_probabilities = j.at("clip").get<bool>();
  fit.formula = formula_from_json(j.at("formula"));
  fit.schema = schema_from_json(j.at("schema"));
  fit.design = design_from_json(j.at("design"));
  fit.model = learner_model_from_json(j.at("model"));
  return fit;
}

void export_pv_csv(const PseudoValueSet& data, std::ostream& out) {
  out << "id,tau,pseudo_value";
  for (const auto& fs : data.schema) out << ',' << csv_quote(fs.name);
  out << '\n';
  for (size_t i = 0; i < data.ids.size(); ++i)
    for (size_t t = 0; t < data.eval_times.size(); ++t) {
      out << csv_quote(data.ids[i]) << ',' << format_number(data.eval_times[t]) << ','
          << format_number(data.values[i][t]);
      for (size_t f = 0; f < data.schema.size(); ++f)
        out << ',' << feature_csv_field(data.schema[f], data.features.cols[f].values[i]);
      out << '\n';
    }
}

}  // namespace survred
