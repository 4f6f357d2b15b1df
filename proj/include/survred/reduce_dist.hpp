#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "survred/curves.hpp"
#include "survred/learners.hpp"
#include "survred/partition.hpp"
#include "survred/serialize.hpp"

namespace survred {

enum class ReductionKind { pem, dt };

// A trained reduction: the transformation state captured at training time
// (cut grid, encoders, formula) plus the fitted learner. Test data must go
// through the identical transformation, so everything needed is stored here.
struct FittedReduction {
  ReductionKind kind = ReductionKind::pem;
  CutGrid grid;
  FormulaSpec formula;
  TaskKind origin_kind = TaskKind::single_event;
  int cause_count = 1;
  std::vector<std::string> cause_labels;
  std::optional<StateGraph> state_graph;
  std::vector<FeatureSpec> schema;
  DesignBuilder design;
  LearnerModel model;

  // diagnostics
  mutable long hazard_clip_count = 0;
  mutable bool extrapolation_warned = false;

  int n_channels() const;  // 1, q causes, or number of graph edges
};

FittedReduction pem_fit(const SurvivalTask& task, const CutGrid& grid, const LearnerSpec& spec,
                        const FormulaSpec& formula);
FittedReduction dt_fit(const SurvivalTask& task, const CutGrid& grid, const LearnerSpec& spec,
                       const FormulaSpec& formula);

// Hazard predictions per channel (cause or transition) and interval,
// on the response scale: rates for PEM, probabilities for DT.
// x is coded against `schema` (fit.schema when null).
std::vector<std::vector<double>> hazard_table(const FittedReduction& fit,
                                              const std::vector<double>& x,
                                              const std::vector<FeatureSpec>* schema = nullptr,
                                              const std::string& episode_level = "");

double pem_predict_hazard(const FittedReduction& fit, const std::vector<double>& x, double tau,
                          int channel = 1, const std::vector<FeatureSpec>* schema = nullptr);
SurvivalCurve pem_survival(const FittedReduction& fit, const std::vector<double>& x,
                           const std::vector<FeatureSpec>* schema = nullptr);
std::vector<StepFunction> pem_cif(const FittedReduction& fit, const std::vector<double>& x,
                                  const std::vector<FeatureSpec>* schema = nullptr);
Matrix pem_transition_matrix(const FittedReduction& fit, const std::vector<double>& x, double s,
                             double tau, const std::vector<FeatureSpec>* schema = nullptr,
                             const std::string& episode_level = "");

double dt_predict_hazard(const FittedReduction& fit, const std::vector<double>& x, int j,
                         int channel = 1, const std::vector<FeatureSpec>* schema = nullptr);
SurvivalCurve dt_survival(const FittedReduction& fit, const std::vector<double>& x,
                          const std::vector<FeatureSpec>* schema = nullptr);
std::vector<StepFunction> dt_cif(const FittedReduction& fit, const std::vector<double>& x,
                                 const std::vector<FeatureSpec>* schema = nullptr);
Matrix dt_transition_matrix(const FittedReduction& fit, const std::vector<double>& x, int j_s,
                            int j_tau, const std::vector<FeatureSpec>* schema = nullptr,
                            const std::string& episode_level = "");

// dispatch on fit.kind
SurvivalCurve predict_survival(const FittedReduction& fit, const std::vector<double>& x,
                               const std::vector<FeatureSpec>* schema = nullptr);
std::vector<StepFunction> predict_cif(const FittedReduction& fit, const std::vector<double>& x,
                                      const std::vector<FeatureSpec>* schema = nullptr);

json reduction_to_json(const FittedReduction& fit);
FittedReduction reduction_from_json(const json& j);

const char* reduction_kind_name(ReductionKind kind);

// Long prediction export: id,time,quantity,cause,value
struct PredictionRow {
  std::string id;
  double time = 0.0;
  std::string quantity;  // survival | cif | hazard | rmst
  int cause = 0;
  double value = 0.0;
};
void write_predictions_csv(std::ostream& out, const std::vector<PredictionRow>& rows);

}  // namespace survred
