#include "survred/config.hpp"

#include <fstream>
#include <sstream>

#include "survred/csv.hpp"
#include "survred/error.hpp"

namespace survred {

namespace {

const std::vector<ConfigKey>& key_registry() {
  static const std::vector<ConfigKey> keys = {
      {"input", "", "input CSV path (required by most commands)"},
      {"output", "", "output path; empty writes to stdout"},
      {"state", "", "sidecar state file for transform (default: <output>.state.json)"},
      {"model", "", "model file path for fit/predict"},
      {"test", "", "test CSV for evaluate (default: score in-sample)"},
      {"task.kind", "single-event", "single-event | competing-risks | multi-state"},
      {"task.cause-levels", "", "declared cause labels, comma separated (optional)"},
      {"reduction", "pem", "pem | dt | ipcw | crm | pv"},
      {"cuts.strategy", "event-quantiles",
       "event-quantiles | equidistant | equidistant-width | all-event-times | explicit"},
      {"cuts.count", "20", "interval count J for parameterized strategies"},
      {"cuts.width", "0", "interval width for the equidistant-width strategy"},
      {"cuts.values", "", "explicit cut points, comma separated"},
      {"learner", "glm", "glm | gbt | km (km only for evaluate)"},
      {"glm.ridge", "0", "ridge penalty (intercept excluded)"},
      {"gbt.learning-rate", "0.1", "boosting shrinkage in (0, 1]"},
      {"gbt.max-depth", "3", "maximum tree depth"},
      {"gbt.min-leaf", "10", "minimum observations per leaf"},
      {"gbt.nrounds", "200", "number of boosting rounds"},
      {"gbt.early-stop-rounds", "0", "stop after this many rounds without improvement (0 = off)"},
      {"gbt.valid-fraction", "0.2", "subject fraction held out when early stopping is on"},
      {"formula.time", "numeric", "how interval end-time enters the design: numeric | factor | omit"},
      {"formula.features", "", "feature subset, comma separated; empty = all, 'none' = intercept only"},
      {"formula.interactions", "", "pairwise interactions a:b, comma separated ('time' allowed)"},
      {"metric", "harrell-c", "harrell-c | isbs"},
      {"seed", "1", "random seed"},
      {"ipcw.tau", "0", "IPCW horizon (required > 0 for the ipcw reduction)"},
      {"pv.quantity", "survival", "survival | rmst | cif | transition"},
      {"pv.cause", "1", "cause index for cif pseudo-values"},
      {"pv.from", "0", "source state index for transition pseudo-values"},
      {"pv.to", "1", "target state index for transition pseudo-values"},
      {"pv.taus", "", "pseudo-value horizons, comma separated; empty = quantile grid"},
      {"pv.count", "7", "size of the default pseudo-value quantile grid"},
      {"pv.clip", "false", "clip probability-type pseudo-value predictions to [0, 1]"},
      {"predict.taus", "", "times for prediction export; empty = grid points"},
      {"sim.scenario", "constant", "constant | breakpoint | tve"},
      {"sim.n", "1000", "number of simulated subjects"},
      {"sim.p", "1", "number of simulated features"},
      {"sim.censor-rate", "0", "target censoring fraction in [0, 1)"},
      {"sim.rate", "1", "constant scenario hazard rate"},
      {"sim.h1", "0.5", "breakpoint scenario hazard before the break"},
      {"sim.h2", "1.5", "breakpoint scenario hazard after the break"},
      {"sim.breakpoint", "1", "breakpoint location"},
      {"sim.h0", "0.8", "tve scenario baseline hazard"},
      {"sim.amplitude", "3", "tve scenario effect amplitude"},
      {"sim.period", "1", "tve scenario sine period"},
      {"sim.beta2", "0.5", "tve scenario linear effect on x2"},
      {"bench.folds", "3", "outer cross-validation folds"},
      {"bench.repeats", "0", "outer repeats; 0 applies the event-count rule"},
      {"bench.budget", "0", "random-search evaluations; 0 = defaults, -1 = 50 per tunable"},
      {"bench.learners", "km,pem_glm,pem_gbt,dt_glm,dt_gbt", "benchmark learner roster"},
      {"bench.tasks", "", "benchmark tasks as name=path pairs, comma separated"},
      {"eval.tau-max", "0", "integration horizon; 0 = 80th percentile of training times"},
  };
  return keys;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

RunConfig::RunConfig() {
  for (const auto& k : key_registry()) values_[k.key] = k.default_value;
}

const std::vector<ConfigKey>& RunConfig::registry() { return key_registry(); }

bool RunConfig::is_known(const std::string& key) const { return values_.count(key) > 0; }

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key: " + key);
  it->second = value;
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line, section;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[' && s.back() == ']') {
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    set(key, value);
  }
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key: " + key);
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  double v;
  if (!parse_number(get(key), v))
    throw ConfigError("config key " + key + " expects a number, got '" + get(key) + "'");
  return v;
}

int RunConfig::get_int(const std::string& key) const {
  double v = get_double(key);
  int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError("config key " + key + " expects an integer");
  return i;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key " + key + " expects true or false");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  return split_list(get(key));
}

std::vector<double> RunConfig::get_number_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_list(key)) {
    double v;
    if (!parse_number(item, v))
      throw ConfigError("config key " + key + " expects numbers, got '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::string RunConfig::help_text() {
  std::ostringstream out;
  out << "Config keys (set in a config file or as --key value flags):\n";
  for (const auto& k : key_registry()) {
    out << "  --" << k.key;
    if (!k.default_value.empty()) out << " (default: " << k.default_value << ")";
    out << "\n      " << k.help << "\n";
  }
  return out.str();
}

}  // namespace survred
