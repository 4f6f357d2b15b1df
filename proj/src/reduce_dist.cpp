#include "survred/reduce_dist.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <unordered_set>

#include "survred/error.hpp"
#include "survred/rng.hpp"

namespace survred {

namespace {

std::vector<std::string> episode_levels(const LongData& ld) {
  std::set<int> eps;
  for (const auto& row : ld.rows) eps.insert(row.episode);
  std::vector<std::string> out;
  for (int e : eps) out.push_back(std::to_string(e));
  if (out.empty()) out.push_back("1");
  return out;
}

// Table columns shared by fit and predict paths. Feature columns carry the
// given schema's dictionaries; reserved columns are "time", "cause",
// "transition" and "episode".
void add_feature_columns(DataTable& table, const std::vector<FeatureSpec>& schema,
                         const std::vector<const std::vector<double>*>& rows) {
  for (size_t f = 0; f < schema.size(); ++f) {
    std::vector<double> values(rows.size());
    for (size_t r = 0; r < rows.size(); ++r) values[r] = (*rows[r])[f];
    if (schema[f].type == FeatureType::categorical)
      table.add_categorical(schema[f].name, std::move(values), schema[f].levels);
    else
      table.add_numeric(schema[f].name, std::move(values));
  }
}

std::vector<std::string> time_factor_levels(const CutGrid& grid) {
  std::vector<std::string> levels;
  for (int j = 1; j <= grid.size(); ++j) levels.push_back(std::to_string(j));
  return levels;
}

struct TableSpec {
  bool with_cause = false;
  bool with_transition = false;
  std::vector<std::string> transition_levels;
  std::vector<std::string> episode_lv;
};

DataTable long_to_table(const LongData& ld, const FormulaSpec& formula, const TableSpec& ts) {
  DataTable table;
  table.nrow = ld.rows.size();
  std::vector<const std::vector<double>*> feat_rows;
  feat_rows.reserve(ld.rows.size());
  for (const auto& row : ld.rows) feat_rows.push_back(&row.features);
  add_feature_columns(table, ld.schema, feat_rows);

  if (formula.time == FormulaSpec::TimeForm::numeric) {
    std::vector<double> v(ld.rows.size());
    for (size_t r = 0; r < ld.rows.size(); ++r) v[r] = ld.rows[r].t_end;
    table.add_numeric("time", std::move(v));
  } else if (formula.time == FormulaSpec::TimeForm::factor) {
    std::vector<double> v(ld.rows.size());
    for (size_t r = 0; r < ld.rows.size(); ++r) v[r] = ld.rows[r].j - 1;
    table.add_categorical("time", std::move(v), time_factor_levels(ld.grid));
  }
  if (ts.with_cause) {
    std::vector<double> v(ld.rows.size());
    for (size_t r = 0; r < ld.rows.size(); ++r) v[r] = ld.rows[r].cause - 1;
    std::vector<std::string> levels = ld.cause_labels;
    if (levels.empty())
      for (int k = 1; k <= ld.cause_count; ++k) levels.push_back(std::to_string(k));
    table.add_categorical("cause", std::move(v), levels);
  }
  if (ts.with_transition) {
    const StateGraph& g = *ld.state_graph;
    std::vector<double> v(ld.rows.size()), ev(ld.rows.size());
    for (size_t r = 0; r < ld.rows.size(); ++r) {
      v[r] = g.edge_index(ld.rows[r].from_state, ld.rows[r].to_state);
      const std::string label = std::to_string(ld.rows[r].episode);
      auto it = std::find(ts.episode_lv.begin(), ts.episode_lv.end(), label);
      ev[r] = static_cast<double>(it - ts.episode_lv.begin());
    }
    table.add_categorical("transition", std::move(v), ts.transition_levels);
    table.add_categorical("episode", std::move(ev), ts.episode_lv);
  }
  return table;
}

std::vector<std::string> main_effects(const LongData& ld, const FormulaSpec& formula,
                                      const TableSpec& ts) {
  std::vector<std::string> mains;
  if (formula.all_features) {
    for (const auto& fs : ld.schema) mains.push_back(fs.name);
  } else {
    for (const auto& name : formula.features) mains.push_back(name);
  }
  if (formula.time != FormulaSpec::TimeForm::omit) mains.push_back("time");
  if (ts.with_cause) mains.push_back("cause");
  if (ts.with_transition) {
    mains.push_back("transition");
    mains.push_back("episode");
  }
  return mains;
}

FittedReduction fit_reduction(ReductionKind kind, const SurvivalTask& task, const CutGrid& grid,
                              const LearnerSpec& spec, const FormulaSpec& formula) {
  LongData ld = expand(task, grid);

  FittedReduction fit;
  fit.kind = kind;
  fit.grid = grid;
  fit.formula = formula;
  fit.origin_kind = task.kind;
  fit.cause_count = ld.cause_count;
  fit.cause_labels = ld.cause_labels;
  fit.state_graph = ld.state_graph;
  fit.schema = ld.schema;

  TableSpec ts;
  ts.with_cause = task.kind == TaskKind::competing_risks;
  ts.with_transition = task.kind == TaskKind::multi_state;
  if (ts.with_transition) {
    const StateGraph& g = *ld.state_graph;
    for (size_t e = 0; e < g.edges.size(); ++e)
      ts.transition_levels.push_back(g.edge_label(static_cast<int>(e)));
    ts.episode_lv = episode_levels(ld);
  }

  DataTable table = long_to_table(ld, formula, ts);
  fit.design.fit(table, main_effects(ld, formula, ts), formula.interactions);
  DesignMatrix X = fit.design.transform(table);

  std::vector<double> y(ld.rows.size()), offset(ld.rows.size());
  for (size_t r = 0; r < ld.rows.size(); ++r) {
    y[r] = ld.rows[r].d;
    offset[r] = ld.rows[r].offset;
  }
  const Objective objective =
      kind == ReductionKind::pem ? Objective::poisson : Objective::logistic;

  const bool want_holdout =
      spec.kind == LearnerSpec::Kind::gbt && spec.gbt.early_stop_rounds > 0;
  if (!want_holdout) {
    fit.model = fit_learner(spec, objective, X, y,
                            kind == ReductionKind::pem ? &offset : nullptr, nullptr);
    return fit;
  }

  // subject-grouped holdout for early stopping
  std::vector<std::string> ids;
  {
    std::unordered_set<std::string> seen;
    for (const auto& row : ld.rows)
      if (seen.insert(row.id).second) ids.push_back(row.id);
  }
  if (ids.size() < 2) throw DataError("early stopping needs at least two subjects");
  Rng rng(spec.seed);
  rng.shuffle(ids);
  size_t n_hold = std::max<size_t>(1, static_cast<size_t>(
                                          std::floor(spec.valid_fraction *
                                                     static_cast<double>(ids.size()))));
  if (n_hold >= ids.size()) n_hold = ids.size() - 1;
  std::unordered_set<std::string> holdout(ids.begin(), ids.begin() + static_cast<long>(n_hold));

  std::vector<long> train_rows, valid_rows;
  for (size_t r = 0; r < ld.rows.size(); ++r)
    (holdout.count(ld.rows[r].id) ? valid_rows : train_rows).push_back(static_cast<long>(r));

  auto subset_matrix = [&](const std::vector<long>& rows) {
    DesignMatrix sub;
    sub.names = X.names;
    sub.X.resize(static_cast<long>(rows.size()), X.cols());
    for (size_t i = 0; i < rows.size(); ++i) sub.X.row(static_cast<long>(i)) = X.X.row(rows[i]);
    return sub;
  };
  auto subset_vec = [&](const std::vector<double>& v, const std::vector<long>& rows) {
    std::vector<double> out(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) out[i] = v[static_cast<size_t>(rows[i])];
    return out;
  };

  DesignMatrix Xt = subset_matrix(train_rows), Xv = subset_matrix(valid_rows);
  std::vector<double> yt = subset_vec(y, train_rows), yv = subset_vec(y, valid_rows);
  std::vector<double> ot = subset_vec(offset, train_rows), ov = subset_vec(offset, valid_rows);

  GbtData valid;
  valid.X = &Xv;
  valid.y = &yv;
  if (kind == ReductionKind::pem) valid.offset = &ov;
  fit.model = fit_learner(spec, objective, Xt, yt,
                          kind == ReductionKind::pem ? &ot : nullptr, nullptr, &valid);
  return fit;
}

}  // namespace

int FittedReduction::n_channels() const {
  switch (origin_kind) {
    case TaskKind::single_event: return 1;
    case TaskKind::competing_risks: return cause_count;
    case TaskKind::multi_state: return static_cast<int>(state_graph->edges.size());
  }
  return 1;
}

FittedReduction pem_fit(const SurvivalTask& task, const CutGrid& grid, const LearnerSpec& spec,
                        const FormulaSpec& formula) {
  return fit_reduction(ReductionKind::pem, task, grid, spec, formula);
}

FittedReduction dt_fit(const SurvivalTask& task, const CutGrid& grid, const LearnerSpec& spec,
                       const FormulaSpec& formula) {
  return fit_reduction(ReductionKind::dt, task, grid, spec, formula);
}

std::vector<std::vector<double>> hazard_table(const FittedReduction& fit,
                                              const std::vector<double>& x,
                                              const std::vector<FeatureSpec>* schema,
                                              const std::string& episode_level) {
  const std::vector<FeatureSpec>& sch = schema ? *schema : fit.schema;
  if (x.size() != sch.size())
    throw DataError("feature vector length does not match the schema");
  const int J = fit.grid.size();
  const int K = fit.n_channels();

  DataTable table;
  table.nrow = static_cast<size_t>(J) * K;
  {
    std::vector<const std::vector<double>*> feat_rows(static_cast<size_t>(J) * K, &x);
    add_feature_columns(table, sch, feat_rows);
  }
  const size_t n = static_cast<size_t>(J) * K;
  if (fit.formula.time == FormulaSpec::TimeForm::numeric) {
    std::vector<double> v(n);
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < J; ++j) v[static_cast<size_t>(k) * J + j] = fit.grid.cuts[static_cast<size_t>(j)];
    table.add_numeric("time", std::move(v));
  } else if (fit.formula.time == FormulaSpec::TimeForm::factor) {
    std::vector<double> v(n);
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < J; ++j) v[static_cast<size_t>(k) * J + j] = j;
    table.add_categorical("time", std::move(v), time_factor_levels(fit.grid));
  }
  if (fit.origin_kind == TaskKind::competing_risks) {
    std::vector<double> v(n);
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < J; ++j) v[static_cast<size_t>(k) * J + j] = k;
    std::vector<std::string> levels = fit.cause_labels;
    if (levels.empty())
      for (int k = 1; k <= K; ++k) levels.push_back(std::to_string(k));
    table.add_categorical("cause", std::move(v), levels);
  }
  if (fit.origin_kind == TaskKind::multi_state) {
    const StateGraph& g = *fit.state_graph;
    std::vector<std::string> tr_levels;
    for (size_t e = 0; e < g.edges.size(); ++e)
      tr_levels.push_back(g.edge_label(static_cast<int>(e)));
    std::vector<double> v(n);
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < J; ++j) v[static_cast<size_t>(k) * J + j] = k;
    table.add_categorical("transition", std::move(v), tr_levels);
    // the episode enters as an ordinary categorical feature; predictions are
    // for one declared episode level
    const auto* term = [&]() -> const DesignBuilder::Term* {
      for (const auto& t : fit.design.terms())
        if (t.source == "episode") return &t;
      return nullptr;
    }();
    std::vector<std::string> ep_levels = term ? term->levels : std::vector<std::string>{"1"};
    std::string wanted = episode_level.empty() ? ep_levels.front() : episode_level;
    auto it = std::find(ep_levels.begin(), ep_levels.end(), wanted);
    if (it == ep_levels.end())
      throw DataError("unknown episode level '" + wanted + "'");
    table.add_categorical("episode",
                          std::vector<double>(n, static_cast<double>(it - ep_levels.begin())),
                          ep_levels);
  }

  DesignMatrix X = fit.design.transform(table);
  std::vector<double> resp = fit.model.predict_response(X);
  std::vector<std::vector<double>> out(static_cast<size_t>(K),
                                       std::vector<double>(static_cast<size_t>(J)));
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < J; ++j)
      out[static_cast<size_t>(k)][static_cast<size_t>(j)] = resp[static_cast<size_t>(k) * J + j];
  return out;
}

double pem_predict_hazard(const FittedReduction& fit, const std::vector<double>& x, double tau,
                          int channel, const std::vector<FeatureSpec>* schema) {
  if (fit.kind != ReductionKind::pem) throw DataError("not a PEM reduction");
  int j = fit.grid.interval_of(tau);
  if (j > fit.grid.size()) {
    fit.extrapolation_warned = true;  // constant extrapolation past the grid
    j = fit.grid.size();
  }
  auto hz = hazard_table(fit, x, schema);
  return hz[static_cast<size_t>(channel - 1)][static_cast<size_t>(j - 1)];
}

double dt_predict_hazard(const FittedReduction& fit, const std::vector<double>& x, int j,
                         int channel, const std::vector<FeatureSpec>* schema) {
  if (fit.kind != ReductionKind::dt) throw DataError("not a DT reduction");
  if (j < 1 || j > fit.grid.size()) throw DataError("interval index out of range");
  auto hz = hazard_table(fit, x, schema);
  return hz[static_cast<size_t>(channel - 1)][static_cast<size_t>(j - 1)];
}

namespace {

// all-cause discrete hazard per interval; per-cause hazards are rescaled
// proportionally when their sum exceeds 1 so that sum_k CIF_k + S = 1 holds
std::vector<std::vector<double>> dt_clipped_hazards(const FittedReduction& fit,
                                                    std::vector<std::vector<double>> hz) {
  const size_t J = hz.empty() ? 0 : hz[0].size();
  for (size_t j = 0; j < J; ++j) {
    double total = 0.0;
    for (const auto& row : hz) total += row[j];
    if (total > 1.0 - 1e-12) {
      double scale = (1.0 - 1e-12) / total;
      for (auto& row : hz) row[j] *= scale;
      fit.hazard_clip_count += 1;
    }
  }
  return hz;
}

}  // namespace

SurvivalCurve pem_survival(const FittedReduction& fit, const std::vector<double>& x,
                           const std::vector<FeatureSpec>* schema) {
  if (fit.kind != ReductionKind::pem) throw DataError("not a PEM reduction");
  if (fit.origin_kind == TaskKind::multi_state)
    throw DataError("survival curves are defined for single-event and competing-risks fits");
  auto hz = hazard_table(fit, x, schema);
  std::vector<double> all_cause(hz[0].size(), 0.0);
  for (const auto& row : hz)
    for (size_t j = 0; j < row.size(); ++j) all_cause[j] += row[j];
  return SurvivalCurve::from_hazards(fit.grid.cuts, all_cause);
}

SurvivalCurve dt_survival(const FittedReduction& fit, const std::vector<double>& x,
                          const std::vector<FeatureSpec>* schema) {
  if (fit.kind != ReductionKind::dt) throw DataError("not a DT reduction");
  if (fit.origin_kind == TaskKind::multi_state)
    throw DataError("survival curves are defined for single-event and competing-risks fits");
  auto hz = dt_clipped_hazards(fit, hazard_table(fit, x, schema));
  SurvivalCurve c;
  c.interp = SurvivalCurve::Interp::step;
  c.knots = fit.grid.cuts;
  double s = 1.0;
  for (size_t j = 0; j < c.knots.size(); ++j) {
    double h = 0.0;
    for (const auto& row : hz) h += row[j];
    s *= 1.0 - h;
    c.values.push_back(s);
  }
  return c;
}

std::vector<StepFunction> pem_cif(const FittedReduction& fit, const std::vector<double>& x,
                                  const std::vector<FeatureSpec>* schema) {
  if (fit.kind != ReductionKind::pem) throw DataError("not a PEM reduction");
  if (fit.origin_kind != TaskKind::competing_risks)
    throw DataError("CIFs require a competing-risks fit");
  auto hz = hazard_table(fit, x, schema);
  const size_t K = hz.size(), J = hz[0].size();

  // all-cause survival at interval bounds
  std::vector<double> surv(J + 1, 1.0);
  {
    double cumhaz = 0.0, prev = 0.0;
    for (size_t j = 0; j < J; ++j) {
      double h_all = 0.0;
      for (size_t k = 0; k < K; ++k) h_all += hz[k][j];
      cumhaz += h_all * (fit.grid.cuts[j] - prev);
      surv[j + 1] = std::exp(-cumhaz);
      prev = fit.grid.cuts[j];
    }
  }

  std::vector<StepFunction> out(K);
  for (size_t k = 0; k < K; ++k) {
    out[k].left_value = 0.0;
    out[k].knots = fit.grid.cuts;
    double cif = 0.0;
    for (size_t j = 0; j < J; ++j) {
      double h_all = 0.0;
      for (size_t kk = 0; kk < K; ++kk) h_all += hz[kk][j];
      // closed-form integral of h_k(u) S(u) over the interval
      if (h_all > 0) cif += hz[k][j] / h_all * (surv[j] - surv[j + 1]);
      out[k].values.push_back(cif);
    }
  }
  return out;
}

std::vector<StepFunction> dt_cif(const FittedReduction& fit, const std::vector<double>& x,
                                 const std::vector<FeatureSpec>* schema) {
  if (fit.kind != ReductionKind::dt) throw DataError("not a DT reduction");
  if (fit.origin_kind != TaskKind::competing_risks)
    throw DataError("CIFs require a competing-risks fit");
  auto hz = dt_clipped_hazards(fit, hazard_table(fit, x, schema));
  const size_t K = hz.size(), J = hz[0].size();
  std::vector<StepFunction> out(K);
  for (size_t k = 0; k < K; ++k) {
    out[k].left_value = 0.0;
    out[k].knots = fit.grid.cuts;
  }
  double s_prev = 1.0;
  std::vector<double> cif(K, 0.0);
  for (size_t j = 0; j < J; ++j) {
    double h_all = 0.0;
    for (size_t k = 0; k < K; ++k) h_all += hz[k][j];
    for (size_t k = 0; k < K; ++k) {
      cif[k] += hz[k][j] * s_prev;
      out[k].values.push_back(cif[k]);
    }
    s_prev *= 1.0 - h_all;
  }
  return out;
}

namespace {

// state-space hazard rate matrix for one interval, channels indexed by edges
Matrix edge_hazard_matrix(const StateGraph& g, const std::vector<std::vector<double>>& hz,
                          size_t j) {
  const int ns = static_cast<int>(g.states.size());
  Matrix m(ns);
  for (size_t e = 0; e < g.edges.size(); ++e) {
    const auto& [from, to] = g.edges[e];
    m.at(from, to) += hz[e][j];
  }
  for (int o = 0; o < ns; ++o) {
    double total = 0.0;
    for (int l = 0; l < ns; ++l)
      if (l != o) total += m.at(o, l);
    m.at(o, o) = -total;
  }
  return m;
}

// exp(H * delta) for a hazard-rate generator, by scaling and squaring. This
// is the limit of the halved (I + H * delta) product: every factor stays
// row-stochastic and the two-state case reduces to exp(-h * delta), matching
// the exponential survival interpolation exactly.
Matrix generator_exp(const Matrix& h, double delta) {
  const int ns = h.n;
  double norm = 0.0;
  for (double v : h.a) norm = std::max(norm, std::abs(v) * delta);
  int squarings = 0;
  double scale = delta;
  while (norm > 0.03125) {
    norm /= 2;
    scale /= 2;
    ++squarings;
  }
  Matrix a(ns);
  for (size_t i = 0; i < h.a.size(); ++i) a.a[i] = h.a[i] * scale;
  Matrix result = Matrix::identity(ns);
  Matrix term = Matrix::identity(ns);
  for (int k = 1; k <= 13; ++k) {
    term = term.mul(a);
    for (double& v : term.a) v /= k;
    for (size_t i = 0; i < result.a.size(); ++i) result.a[i] += term.a[i];
  }
  for (int s = 0; s < squarings; ++s) result = result.mul(result);
  return result;
}

}  // namespace

Matrix pem_transition_matrix(const FittedReduction& fit, const std::vector<double>& x, double s,
                             double tau, const std::vector<FeatureSpec>* schema,
                             const std::string& episode_level) {
  if (fit.kind != ReductionKind::pem) throw DataError("not a PEM reduction");
  if (fit.origin_kind != TaskKind::multi_state)
    throw DataError("transition matrices require a multi-state fit");
  if (!(s < tau)) throw DataError("transition window requires s < tau");
  const StateGraph& g = *fit.state_graph;
  auto hz = hazard_table(fit, x, schema, episode_level);

  Matrix p = Matrix::identity(static_cast<int>(g.states.size()));
  const int J = fit.grid.size();
  for (int j = 1; j <= J; ++j) {
    double lo = std::max(fit.grid.lower(j), s);
    double hi = std::min(fit.grid.upper(j), tau);
    if (hi <= lo) continue;
    Matrix h = edge_hazard_matrix(g, hz, static_cast<size_t>(j - 1));
    p = p.mul(generator_exp(h, hi - lo));
  }
  if (tau > fit.grid.cuts.back()) {
    fit.extrapolation_warned = true;
    Matrix h = edge_hazard_matrix(g, hz, static_cast<size_t>(J - 1));
    p = p.mul(generator_exp(h, tau - std::max(s, fit.grid.cuts.back())));
  }
  return p;
}

Matrix dt_transition_matrix(const FittedReduction& fit, const std::vector<double>& x, int j_s,
                            int j_tau, const std::vector<FeatureSpec>* schema,
                            const std::string& episode_level) {
  if (fit.kind != ReductionKind::dt) throw DataError("not a DT reduction");
  if (fit.origin_kind != TaskKind::multi_state)
    throw DataError("transition matrices require a multi-state fit");
  if (j_s < 1 || j_tau > fit.grid.size() || j_s > j_tau)
    throw DataError("interval range out of bounds");
  const StateGraph& g = *fit.state_graph;
  const int ns = static_cast<int>(g.states.size());
  auto hz = hazard_table(fit, x, schema, episode_level);

  Matrix p = Matrix::identity(ns);
  for (int j = j_s; j <= j_tau; ++j) {
    Matrix m(ns);
    for (size_t e = 0; e < g.edges.size(); ++e)
      m.at(g.edges[e].first, g.edges[e].second) += hz[e][static_cast<size_t>(j - 1)];
    for (int o = 0; o < ns; ++o) {
      double total = 0.0;
      for (int l = 0; l < ns; ++l)
        if (l != o) total += m.at(o, l);
      if (total > 1.0) {  // proportional clipping keeps the row stochastic
        for (int l = 0; l < ns; ++l)
          if (l != o) m.at(o, l) /= total;
        total = 1.0;
        fit.hazard_clip_count += 1;
      }
      m.at(o, o) = 1.0 - total;
    }
    p = p.mul(m);
  }
  return p;
}

SurvivalCurve predict_survival(const FittedReduction& fit, const std::vector<double>& x,
                               const std::vector<FeatureSpec>* schema) {
  return fit.kind == ReductionKind::pem ? pem_survival(fit, x, schema)
                                        : dt_survival(fit, x, schema);
}

std::vector<StepFunction> predict_cif(const FittedReduction& fit, const std::vector<double>& x,
                                      const std::vector<FeatureSpec>* schema) {
  return fit.kind == ReductionKind::pem ? pem_cif(fit, x, schema) : dt_cif(fit, x, schema);
}

const char* reduction_kind_name(ReductionKind kind) {
  return kind == ReductionKind::pem ? "pem" : "dt";
}

json reduction_to_json(const FittedReduction& fit) {
  json j{{"reduction", reduction_kind_name(fit.kind)},
         {"grid", to_json(fit.grid)},
         {"formula", to_json(fit.formula)},
         {"origin_kind", task_kind_name(fit.origin_kind)},
         {"cause_count", fit.cause_count},
         {"cause_labels", fit.cause_labels},
         {"schema", schema_to_json(fit.schema)},
         {"design", to_json(fit.design)},
         {"model", to_json(fit.model)}};
  if (fit.state_graph) j["state_graph"] = to_json(*fit.state_graph);
  return j;
}

FittedReduction reduction_from_json(const json& j) {
  FittedReduction fit;
  std::string kind = j.at("reduction").get<std::string>();
  if (kind == "pem") fit.kind = ReductionKind::pem;
  else if (kind == "dt") fit.kind = ReductionKind::dt;
  else throw DataError("unknown reduction kind in model file: " + kind);
  fit.grid = cut_grid_from_json(j.at("grid"));
  fit.formula = formula_from_json(j.at("formula"));
  fit.origin_kind = task_kind_from_name(j.at("origin_kind").get<std::string>());
  fit.cause_count = j.at("cause_count").get<int>();
  fit.cause_labels = j.at("cause_labels").get<std::vector<std::string>>();
  fit.schema = schema_from_json(j.at("schema"));
  fit.design = design_from_json(j.at("design"));
  fit.model = learner_model_from_json(j.at("model"));
  if (j.contains("state_graph")) fit.state_graph = state_graph_from_json(j.at("state_graph"));
  return fit;
}

void write_predictions_csv(std::ostream& out, const std::vector<PredictionRow>& rows) {
  out << "id,time,quantity,cause,value\n";
  for (const auto& r : rows)
    out << csv_quote(r.id) << ',' << format_number(r.time) << ',' << r.quantity << ','
        << r.cause << ',' << format_number(r.value) << '\n';
}

}  // namespace survred
