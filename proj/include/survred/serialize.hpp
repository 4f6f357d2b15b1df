#pragma once

#include <json.hpp>

#include "survred/design.hpp"
#include "survred/estimators.hpp"
#include "survred/learners.hpp"
#include "survred/partition.hpp"
#include "survred/survdata.hpp"

// JSON (de)serialization for everything persisted in model and state files.
// Doubles round-trip exactly through nlohmann::json.

namespace survred {

using json = nlohmann::json;

json to_json(const CutGrid& g);
CutGrid cut_grid_from_json(const json& j);

json to_json(const FormulaSpec& f);
FormulaSpec formula_from_json(const json& j);

json to_json(const FeatureSpec& f);
FeatureSpec feature_from_json(const json& j);
json schema_to_json(const std::vector<FeatureSpec>& schema);
std::vector<FeatureSpec> schema_from_json(const json& j);

json to_json(const StateGraph& g);
StateGraph state_graph_from_json(const json& j);

json to_json(const StepFunction& f);
StepFunction step_from_json(const json& j);

json to_json(const DesignBuilder& b);
DesignBuilder design_from_json(const json& j);

json to_json(const GlmFit& f);
GlmFit glm_from_json(const json& j);

json to_json(const GbtFit& f);
GbtFit gbt_from_json(const json& j);

json to_json(const LearnerModel& m);
LearnerModel learner_model_from_json(const json& j);

void write_json_file(const std::string& path, const json& j);
json read_json_file(const std::string& path);

}  // namespace survred
