#include "survred/serialize.hpp"

#include <fstream>

#include "survred/error.hpp"

namespace survred {

namespace {

const char* strategy_name(CutStrategy::Kind k) {
  switch (k) {
    case CutStrategy::Kind::equidistant_count: return "equidistant";
    case CutStrategy::Kind::equidistant_width: return "equidistant-width";
    case CutStrategy::Kind::event_quantiles: return "event-quantiles";
    case CutStrategy::Kind::all_event_times: return "all-event-times";
    case CutStrategy::Kind::explicit_cuts: return "explicit";
  }
  return "?";
}

CutStrategy::Kind strategy_from_name(const std::string& s) {
  if (s == "equidistant") return CutStrategy::Kind::equidistant_count;
  if (s == "equidistant-width") return CutStrategy::Kind::equidistant_width;
  if (s == "event-quantiles") return CutStrategy::Kind::event_quantiles;
  if (s == "all-event-times") return CutStrategy::Kind::all_event_times;
  if (s == "explicit") return CutStrategy::Kind::explicit_cuts;
  throw DataError("unknown cut strategy in model file: " + s);
}

}  // namespace

json to_json(const CutGrid& g) {
  return json{{"cuts", g.cuts}, {"strategy", strategy_name(g.strategy)}, {"truncated", g.truncated}};
}

CutGrid cut_grid_from_json(const json& j) {
  CutGrid g;
  g.cuts = j.at("cuts").get<std::vector<double>>();
  g.strategy = strategy_from_name(j.at("strategy").get<std::string>());
  g.truncated = j.at("truncated").get<bool>();
  return g;
}

json to_json(const FormulaSpec& f) {
  const char* time = f.time == FormulaSpec::TimeForm::omit
                         ? "omit"
                         : (f.time == FormulaSpec::TimeForm::numeric ? "numeric" : "factor");
  json inter = json::array();
  for (const auto& [a, b] : f.interactions) inter.push_back(json::array({a, b}));
  return json{{"time", time},
              {"all_features", f.all_features},
              {"features", f.features},
              {"interactions", inter}};
}

FormulaSpec formula_from_json(const json& j) {
  FormulaSpec f;
  std::string time = j.at("time").get<std::string>();
  if (time == "omit") f.time = FormulaSpec::TimeForm::omit;
  else if (time == "numeric") f.time = FormulaSpec::TimeForm::numeric;
  else if (time == "factor") f.time = FormulaSpec::TimeForm::factor;
  else throw DataError("unknown time form in model file: " + time);
  f.all_features = j.at("all_features").get<bool>();
  f.features = j.at("features").get<std::vector<std::string>>();
  for (const auto& pair : j.at("interactions"))
    f.interactions.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
  return f;
}

json to_json(const FeatureSpec& f) {
  return json{{"name", f.name},
              {"type", f.type == FeatureType::numeric ? "numeric" : "categorical"},
              {"levels", f.levels}};
}

FeatureSpec feature_from_json(const json& j) {
  FeatureSpec f;
  f.name = j.at("name").get<std::string>();
  f.type = j.at("type").get<std::string>() == "numeric" ? FeatureType::numeric
                                                        : FeatureType::categorical;
  f.levels = j.at("levels").get<std::vector<std::string>>();
  return f;
}

json schema_to_json(const std::vector<FeatureSpec>& schema) {
  json arr = json::array();
  for (const auto& f : schema) arr.push_back(to_json(f));
  return arr;
}

std::vector<FeatureSpec> schema_from_json(const json& j) {
  std::vector<FeatureSpec> out;
  for (const auto& item : j) out.push_back(feature_from_json(item));
  return out;
}

json to_json(const StateGraph& g) {
  json edges = json::array();
  for (const auto& [a, b] : g.edges) edges.push_back(json::array({a, b}));
  return json{{"states", g.states}, {"edges", edges}};
}

StateGraph state_graph_from_json(const json& j) {
  StateGraph g;
  g.states = j.at("states").get<std::vector<std::string>>();
  for (const auto& e : j.at("edges"))
    g.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return g;
}

json to_json(const StepFunction& f) {
  return json{{"knots", f.knots}, {"values", f.values}, {"left_value", f.left_value}};
}

StepFunction step_from_json(const json& j) {
  StepFunction f;
  f.knots = j.at("knots").get<std::vector<double>>();
  f.values = j.at("values").get<std::vector<double>>();
  f.left_value = j.at("left_value").get<double>();
  return f;
}

json to_json(const DesignBuilder& b) {
  json terms = json::array();
  for (const auto& t : b.terms()) {
    terms.push_back(json{{"source", t.source},
                         {"type", t.type == ColumnType::numeric ? "numeric" : "categorical"},
                         {"levels", t.levels}});
  }
  json inter = json::array();
  for (const auto& [a, bb] : b.interaction_terms()) inter.push_back(json::array({a, bb}));
  return json{{"terms", terms}, {"interactions", inter}};
}

DesignBuilder design_from_json(const json& j) {
  std::vector<DesignBuilder::Term> terms;
  for (const auto& t : j.at("terms")) {
    DesignBuilder::Term term;
    term.source = t.at("source").get<std::string>();
    term.type = t.at("type").get<std::string>() == "numeric" ? ColumnType::numeric
                                                             : ColumnType::categorical;
    term.levels = t.at("levels").get<std::vector<std::string>>();
    terms.push_back(std::move(term));
  }
  std::vector<std::pair<int, int>> inter;
  for (const auto& e : j.at("interactions"))
    inter.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  DesignBuilder b;
  b.restore(std::move(terms), std::move(inter));
  return b;
}

json to_json(const GlmFit& f) {
  return json{{"family", family_name(f.family)},
              {"coef", f.coef},
              {"ridge", f.ridge},
              {"iterations", f.iterations},
              {"deviance", f.deviance}};
}

GlmFit glm_from_json(const json& j) {
  GlmFit f;
  f.family = family_from_name(j.at("family").get<std::string>());
  f.coef = j.at("coef").get<std::vector<double>>();
  f.ridge = j.at("ridge").get<double>();
  f.iterations = j.at("iterations").get<int>();
  f.deviance = j.at("deviance").get<double>();
  return f;
}

json to_json(const GbtFit& f) {
  json trees = json::array();
  for (const auto& tree : f.trees) {
    json nodes = json::array();
    for (const auto& nd : tree.nodes)
      nodes.push_back(json::array({nd.feature, nd.threshold, nd.left, nd.right, nd.value}));
    trees.push_back(std::move(nodes));
  }
  return json{{"loss", gbt_loss_name(f.loss)},
              {"base_score", f.base_score},
              {"best_iteration", f.best_iteration},
              {"learning_rate", f.params.learning_rate},
              {"max_depth", f.params.max_depth},
              {"min_leaf", f.params.min_leaf},
              {"nrounds", f.params.nrounds},
              {"early_stop_rounds", f.params.early_stop_rounds},
              {"trees", trees}};
}

GbtFit gbt_from_json(const json& j) {
  GbtFit f;
  f.loss = gbt_loss_from_name(j.at("loss").get<std::string>());
  f.base_score = j.at("base_score").get<double>();
  f.best_iteration = j.at("best_iteration").get<int>();
  f.params.learning_rate = j.at("learning_rate").get<double>();
  f.params.max_depth = j.at("max_depth").get<int>();
  f.params.min_leaf = j.at("min_leaf").get<int>();
  f.params.nrounds = j.at("nrounds").get<int>();
  f.params.early_stop_rounds = j.at("early_stop_rounds").get<int>();
  for (const auto& tree_json : j.at("trees")) {
    Tree tree;
    for (const auto& nd : tree_json) {
      TreeNode node;
      node.feature = nd.at(0).get<int>();
      node.threshold = nd.at(1).get<double>();
      node.left = nd.at(2).get<int>();
      node.right = nd.at(3).get<int>();
      node.value = nd.at(4).get<double>();
      tree.nodes.push_back(node);
    }
    f.trees.push_back(std::move(tree));
  }
  return f;
}

json to_json(const LearnerModel& m) {
  json j{{"kind", m.kind == LearnerSpec::Kind::glm ? "glm" : "gbt"},
         {"objective", objective_name(m.objective)}};
  if (m.kind == LearnerSpec::Kind::glm)
    j["glm"] = to_json(m.glm);
  else
    j["gbt"] = to_json(m.gbt);
  return j;
}

LearnerModel learner_model_from_json(const json& j) {
  LearnerModel m;
  m.kind = j.at("kind").get<std::string>() == "glm" ? LearnerSpec::Kind::glm
                                                    : LearnerSpec::Kind::gbt;
  std::string obj = j.at("objective").get<std::string>();
  if (obj == "poisson") m.objective = Objective::poisson;
  else if (obj == "logistic") m.objective = Objective::logistic;
  else if (obj == "squared") m.objective = Objective::squared;
  else throw DataError("unknown objective in model file: " + obj);
  if (m.kind == LearnerSpec::Kind::glm)
    m.glm = glm_from_json(j.at("glm"));
  else
    m.gbt = gbt_from_json(j.at("gbt"));
  return m;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << j.dump(1) << '\n';
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DataError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace survred
