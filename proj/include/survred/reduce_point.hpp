#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "survred/curves.hpp"
#include "survred/estimators.hpp"
#include "survred/learners.hpp"
#include "survred/serialize.hpp"

namespace survred {

// ---------------------------------------------------------------------------
// IPCW: censoring-weighted binary classification at a fixed horizon.

struct IpcwDataset {
  double tau = 0.0;
  std::vector<std::string> ids;
  std::vector<double> labels;   // e_i = 1(t_i <= tau and d_i = 1)
  std::vector<double> weights;  // omega_i
  StepFunction censor_km;       // G-hat from the training data
  std::vector<FeatureSpec> schema;
  DataTable features;
};

IpcwDataset ipcw_transform(const SurvivalTask& task, double tau);

struct IpcwFit {
  double tau = 0.0;
  StepFunction censor_km;
  FormulaSpec formula;
  std::vector<FeatureSpec> schema;
  DesignBuilder design;
  LearnerModel model;
};

IpcwFit ipcw_fit(const SurvivalTask& task, double tau, const LearnerSpec& spec,
                 const FormulaSpec& formula);
// event probability pi-hat; the single-horizon survival estimate is 1 - pi-hat
double ipcw_predict_risk(const IpcwFit& fit, const std::vector<double>& x,
                         const std::vector<FeatureSpec>* schema = nullptr);

void export_ipcw_csv(const IpcwDataset& data, std::ostream& out);

// ---------------------------------------------------------------------------
// CRM: pairwise earlier-failure probabilities averaged into ranking targets.

// p_ij = P(y_i < y_j | observed data) under the marginal Kaplan-Meier
// plug-in. degenerate_pairs counts pairs where a required denominator
// S(t) was zero and the symmetric 1/2 convention was used.
double crm_pairwise(double t_i, int d_i, double t_j, int d_j, const StepFunction& km,
                    long* degenerate_pairs = nullptr);

struct CrmDataset {
  std::vector<std::string> ids;
  std::vector<double> targets;  // r_i in [0, 1]
  StepFunction km;
  std::vector<FeatureSpec> schema;
  DataTable features;
  long degenerate_pairs = 0;
};

CrmDataset crm_targets(const SurvivalTask& task);

struct CrmFit {
  FormulaSpec formula;
  std::vector<FeatureSpec> schema;
  DesignBuilder design;
  LearnerModel model;
};

CrmFit crm_fit(const SurvivalTask& task, const LearnerSpec& spec, const FormulaSpec& formula);
double crm_predict(const CrmFit& fit, const std::vector<double>& x,
                   const std::vector<FeatureSpec>* schema = nullptr);

void export_crm_csv(const CrmDataset& data, std::ostream& out);

// ---------------------------------------------------------------------------
// Pseudo-values: jackknife surrogates usable as uncensored regression targets.

enum class PvKind { survival, rmst, cif, transition };

struct PvQuantity {
  PvKind kind = PvKind::survival;
  int cause = 1;       // cif
  int from_state = 0;  // transition
  int to_state = 1;
};

struct PseudoValueSet {
  PvQuantity quantity;
  std::vector<double> eval_times;
  std::vector<std::string> ids;             // unique subjects
  std::vector<std::vector<double>> values;  // [subject][time]; unbounded reals
  std::vector<FeatureSpec> schema;
  DataTable features;  // one row per subject
  bool stacked = true;
  bool extrapolation_warned = false;
};

PseudoValueSet pseudo_values(const SurvivalTask& task, const PvQuantity& quantity,
                             const std::vector<double>& taus);

// K equally spaced quantiles of the observed event times (levels k/(K+1))
std::vector<double> default_pv_grid(const SurvivalTask& task, int k = 7);

struct PvFit {
  PvQuantity quantity;
  std::vector<double> taus;
  bool clip_probabilities = false;  // off by default
  FormulaSpec formula;
  std::vector<FeatureSpec> schema;
  DesignBuilder design;
  LearnerModel model;
  mutable long clip_count = 0;
};

PvFit pv_fit(const PseudoValueSet& pvset, const LearnerSpec& spec, const FormulaSpec& formula,
             bool clip_probabilities = false);
double pv_predict(const PvFit& fit, const std::vector<double>& x, double tau,
                  const std::vector<FeatureSpec>* schema = nullptr);

void export_pv_csv(const PseudoValueSet& data, std::ostream& out);

// shared helper: one feature row per subject (first episode for start-stop data)
DataTable subject_features(const SurvivalTask& task, std::vector<std::string>* ids_out = nullptr);

json ipcw_to_json(const IpcwFit& fit);
IpcwFit ipcw_from_json(const json& j);
json crm_to_json(const CrmFit& fit);
CrmFit crm_from_json(const json& j);
json pv_to_json(const PvFit& fit);
PvFit pv_from_json(const json& j);

}  // namespace survred
