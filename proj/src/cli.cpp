#include "survred/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "survred/config.hpp"
#include "survred/error.hpp"
#include "survred/eval.hpp"
#include "survred/reduce_dist.hpp"
#include "survred/reduce_point.hpp"
#include "survred/simulate.hpp"

namespace survred {

namespace {

constexpr int kModelVersion = 1;

FormatSpec format_from_config(const RunConfig& cfg) {
  FormatSpec spec;
  spec.kind = task_kind_from_name(cfg.get("task.kind"));
  spec.cause_levels = cfg.get_list("task.cause-levels");
  return spec;
}

SurvivalTask load_input(const RunConfig& cfg) {
  const std::string& path = cfg.get("input");
  if (path.empty()) throw ConfigError("missing required --input path");
  return load_csv(path, format_from_config(cfg));
}

CutStrategy cuts_from_config(const RunConfig& cfg) {
  const std::string& name = cfg.get("cuts.strategy");
  if (name == "event-quantiles") return CutStrategy::event_quantiles(cfg.get_int("cuts.count"));
  if (name == "equidistant") return CutStrategy::equidistant(cfg.get_int("cuts.count"));
  if (name == "equidistant-width")
    return CutStrategy::equidistant_width(cfg.get_double("cuts.width"));
  if (name == "all-event-times") return CutStrategy::all_event_times();
  if (name == "explicit") return CutStrategy::explicit_cuts(cfg.get_number_list("cuts.values"));
  throw ConfigError("unknown cut strategy: " + name);
}

LearnerSpec learner_from_config(const RunConfig& cfg) {
  LearnerSpec spec;
  const std::string& name = cfg.get("learner");
  if (name == "glm") spec.kind = LearnerSpec::Kind::glm;
  else if (name == "gbt") spec.kind = LearnerSpec::Kind::gbt;
  else throw ConfigError("unknown learner: " + name + " (expected glm or gbt)");
  spec.ridge = cfg.get_double("glm.ridge");
  spec.gbt.learning_rate = cfg.get_double("gbt.learning-rate");
  spec.gbt.max_depth = cfg.get_int("gbt.max-depth");
  spec.gbt.min_leaf = cfg.get_int("gbt.min-leaf");
  spec.gbt.nrounds = cfg.get_int("gbt.nrounds");
  spec.gbt.early_stop_rounds = cfg.get_int("gbt.early-stop-rounds");
  spec.valid_fraction = cfg.get_double("gbt.valid-fraction");
  spec.seed = static_cast<uint64_t>(cfg.get_int("seed"));
  return spec;
}

FormulaSpec formula_from_config(const RunConfig& cfg) {
  FormulaSpec f;
  const std::string& time = cfg.get("formula.time");
  if (time == "numeric") f.time = FormulaSpec::TimeForm::numeric;
  else if (time == "factor") f.time = FormulaSpec::TimeForm::factor;
  else if (time == "omit") f.time = FormulaSpec::TimeForm::omit;
  else throw ConfigError("unknown formula.time: " + time);
  f.features = cfg.get_list("formula.features");
  if (f.features.size() == 1 && f.features[0] == "none") {
    f.all_features = false;
    f.features.clear();
  } else if (!f.features.empty()) {
    f.all_features = false;
  }
  for (const auto& pair : cfg.get_list("formula.interactions")) {
    auto parts = split_list(pair, ':');
    if (parts.size() != 2)
      throw ConfigError("interactions must be a:b pairs, got '" + pair + "'");
    f.interactions.emplace_back(parts[0], parts[1]);
  }
  return f;
}

PvQuantity pv_quantity_from_config(const RunConfig& cfg) {
  PvQuantity q;
  const std::string& name = cfg.get("pv.quantity");
  if (name == "survival") q.kind = PvKind::survival;
  else if (name == "rmst") q.kind = PvKind::rmst;
  else if (name == "cif") q.kind = PvKind::cif;
  else if (name == "transition") q.kind = PvKind::transition;
  else throw ConfigError("unknown pv.quantity: " + name);
  q.cause = cfg.get_int("pv.cause");
  q.from_state = cfg.get_int("pv.from");
  q.to_state = cfg.get_int("pv.to");
  return q;
}

std::vector<double> pv_taus(const RunConfig& cfg, const SurvivalTask& task) {
  auto taus = cfg.get_number_list("pv.taus");
  if (taus.empty()) taus = default_pv_grid(task, cfg.get_int("pv.count"));
  return taus;
}

// output helper: stream to file when a path is configured, else to `fallback`
struct OutputTarget {
  std::ofstream file;
  std::ostream* stream = nullptr;

  OutputTarget(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      stream = &fallback;
    } else {
      file.open(path);
      if (!file) throw DataError("cannot write file: " + path);
      stream = &file;
    }
  }
  std::ostream& out() { return *stream; }
};

std::string state_path(const RunConfig& cfg) {
  std::string p = cfg.get("state");
  if (!p.empty()) return p;
  std::string out = cfg.get("output");
  if (out.empty()) return "";
  return out + ".state.json";
}

int worker_count() {
  const char* env = std::getenv("SURVRED_WORKERS");
  if (!env) return 1;
  int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

// ---------------------------------------------------------------------------

int cmd_transform(const RunConfig& cfg, std::ostream& out) {
  SurvivalTask task = load_input(cfg);
  const std::string& reduction = cfg.get("reduction");
  OutputTarget target(cfg.get("output"), out);
  json state{{"format", "survred-state"}, {"version", kModelVersion}, {"reduction", reduction}};

  if (reduction == "pem" || reduction == "dt") {
    CutGrid grid = make_cuts(task, cuts_from_config(cfg));
    LongData ld = expand(task, grid);
    if (reduction == "dt") {
      // the DT reduction relies on the interval index alone
      for (auto& row : ld.rows) {
        row.t = 1.0;
        row.offset = 0.0;
      }
    }
    export_long_csv(ld, target.out());
    state["grid"] = to_json(grid);
    state["schema"] = schema_to_json(task.schema);
  } else if (reduction == "ipcw") {
    double tau = cfg.get_double("ipcw.tau");
    IpcwDataset data = ipcw_transform(task, tau);
    export_ipcw_csv(data, target.out());
    state["tau"] = tau;
    state["censor_km"] = to_json(data.censor_km);
  } else if (reduction == "crm") {
    CrmDataset data = crm_targets(task);
    export_crm_csv(data, target.out());
    state["km"] = to_json(data.km);
  } else if (reduction == "pv") {
    PseudoValueSet data = pseudo_values(task, pv_quantity_from_config(cfg), pv_taus(cfg, task));
    export_pv_csv(data, target.out());
    state["taus"] = data.eval_times;
  } else {
    throw ConfigError("unknown reduction: " + reduction);
  }

  std::string sp = state_path(cfg);
  if (!sp.empty()) write_json_file(sp, state);
  return 0;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  SimSpec spec;
  spec.scenario = scenario_from_name(cfg.get("sim.scenario"));
  spec.n = cfg.get_int("sim.n");
  spec.p = cfg.get_int("sim.p");
  spec.censor_rate = cfg.get_double("sim.censor-rate");
  spec.seed = static_cast<uint64_t>(cfg.get_int("seed"));
  spec.rate = cfg.get_double("sim.rate");
  spec.h1 = cfg.get_double("sim.h1");
  spec.h2 = cfg.get_double("sim.h2");
  spec.breakpoint = cfg.get_double("sim.breakpoint");
  spec.h0 = cfg.get_double("sim.h0");
  spec.amplitude = cfg.get_double("sim.amplitude");
  spec.period = cfg.get_double("sim.period");
  spec.beta2 = cfg.get_double("sim.beta2");
  SurvivalTask task = simulate(spec);
  OutputTarget target(cfg.get("output"), out);
  write_csv(target.out(), task_to_table(task));
  return 0;
}

int cmd_fit(const RunConfig& cfg) {
  SurvivalTask task = load_input(cfg);
  const std::string& reduction = cfg.get("reduction");
  const std::string& model_path = cfg.get("model");
  if (model_path.empty()) throw ConfigError("fit requires --model output path");
  LearnerSpec spec = learner_from_config(cfg);
  FormulaSpec formula = formula_from_config(cfg);

  json file{{"format", "survred-model"}, {"version", kModelVersion}, {"reduction", reduction}};
  // training-split censoring estimator, stored for ISBS evaluation
  if (task.kind == TaskKind::single_event) {
    std::vector<double> times;
    std::vector<int> status;
    for (const auto& r : task.records) {
      times.push_back(r.time);
      status.push_back(r.status);
    }
    file["censor_km"] = to_json(censoring_km(times, status));
  }

  if (reduction == "pem" || reduction == "dt") {
    CutGrid grid = make_cuts(task, cuts_from_config(cfg));
    FittedReduction fit = reduction == "pem" ? pem_fit(task, grid, spec, formula)
                                             : dt_fit(task, grid, spec, formula);
    file["payload"] = reduction_to_json(fit);
  } else if (reduction == "ipcw") {
    double tau = cfg.get_double("ipcw.tau");
    FormulaSpec f = formula;
    f.time = FormulaSpec::TimeForm::omit;
    file["payload"] = ipcw_to_json(ipcw_fit(task, tau, spec, f));
  } else if (reduction == "crm") {
    FormulaSpec f = formula;
    f.time = FormulaSpec::TimeForm::omit;
    file["payload"] = crm_to_json(crm_fit(task, spec, f));
  } else if (reduction == "pv") {
    PseudoValueSet data = pseudo_values(task, pv_quantity_from_config(cfg), pv_taus(cfg, task));
    FormulaSpec f = formula;
    f.time = FormulaSpec::TimeForm::omit;
    file["payload"] = pv_to_json(pv_fit(data, spec, f, cfg.get_bool("pv.clip")));
  } else {
    throw ConfigError("unknown reduction: " + reduction);
  }
  write_json_file(model_path, file);
  return 0;
}

// feature rows for prediction: a full task CSV or a bare id+features file
struct FeatureData {
  std::vector<std::string> ids;
  std::vector<FeatureSpec> schema;
  std::vector<std::vector<double>> rows;
};

FeatureData load_features(const std::string& path, const std::vector<FeatureSpec>& model_schema) {
  CsvTable table = read_csv_file(path);
  FeatureData out;
  int id_col = table.column("id");
  std::vector<int> cols;
  for (const auto& fs : model_schema) {
    int c = table.column(fs.name);
    if (c < 0) throw DataError("prediction input is missing feature column '" + fs.name + "'");
    cols.push_back(c);
    FeatureSpec spec;
    spec.name = fs.name;
    spec.type = fs.type;
    out.schema.push_back(spec);
  }
  for (size_t r = 0; r < table.nrow(); ++r) {
    out.ids.push_back(id_col >= 0 ? table.rows[r][static_cast<size_t>(id_col)]
                                  : std::to_string(r + 1));
    std::vector<double> x(cols.size());
    for (size_t f = 0; f < cols.size(); ++f) {
      const std::string& v = table.rows[r][static_cast<size_t>(cols[f])];
      FeatureSpec& fs = out.schema[f];
      if (fs.type == FeatureType::numeric) {
        if (!parse_number(v, x[f]))
          throw DataError("row " + std::to_string(r + 2) + ": non-numeric value '" + v +
                          "' in column '" + fs.name + "'");
      } else {
        int code = fs.level_code(v);
        if (code < 0) {
          fs.levels.push_back(v);
          code = static_cast<int>(fs.levels.size()) - 1;
        }
        x[f] = code;
      }
    }
    out.rows.push_back(std::move(x));
  }
  return out;
}

int cmd_predict(const RunConfig& cfg, std::ostream& out) {
  const std::string& model_path = cfg.get("model");
  if (model_path.empty()) throw ConfigError("predict requires --model path");
  json file = read_json_file(model_path);
  if (file.value("format", "") != "survred-model")
    throw DataError("not a survred model file: " + model_path);
  const std::string reduction = file.at("reduction").get<std::string>();

  std::vector<PredictionRow> rows;
  auto taus = cfg.get_number_list("predict.taus");

  if (reduction == "pem" || reduction == "dt") {
    FittedReduction fit = reduction_from_json(file.at("payload"));
    FeatureData data = load_features(cfg.get("input"), fit.schema);
    std::vector<double> times = taus.empty() ? fit.grid.cuts : taus;
    for (size_t i = 0; i < data.rows.size(); ++i) {
      const auto& x = data.rows[i];
      if (fit.origin_kind == TaskKind::multi_state) {
        auto hz = hazard_table(fit, x, &data.schema);
        for (size_t e = 0; e < hz.size(); ++e)
          for (int j = 1; j <= fit.grid.size(); ++j)
            rows.push_back({data.ids[i], fit.grid.upper(j), "hazard", static_cast<int>(e + 1),
                            hz[e][static_cast<size_t>(j - 1)]});
        continue;
      }
      SurvivalCurve surv = predict_survival(fit, x, &data.schema);
      for (double t : times) rows.push_back({data.ids[i], t, "survival", 0, surv(t)});
      rows.push_back({data.ids[i], fit.grid.cuts.back(), "rmst", 0,
                      rmst(surv, fit.grid.cuts.back())});
      if (fit.origin_kind == TaskKind::competing_risks) {
        auto cifs = predict_cif(fit, x, &data.schema);
        for (size_t k = 0; k < cifs.size(); ++k)
          for (double t : times)
            rows.push_back({data.ids[i], t, "cif", static_cast<int>(k + 1), cifs[k](t)});
      }
    }
  } else if (reduction == "ipcw") {
    IpcwFit fit = ipcw_from_json(file.at("payload"));
    FeatureData data = load_features(cfg.get("input"), fit.schema);
    for (size_t i = 0; i < data.rows.size(); ++i) {
      double risk = ipcw_predict_risk(fit, data.rows[i], &data.schema);
      rows.push_back({data.ids[i], fit.tau, "risk", 0, risk});
      rows.push_back({data.ids[i], fit.tau, "survival", 0, 1.0 - risk});
    }
  } else if (reduction == "crm") {
    CrmFit fit = crm_from_json(file.at("payload"));
    FeatureData data = load_features(cfg.get("input"), fit.schema);
    for (size_t i = 0; i < data.rows.size(); ++i)
      rows.push_back({data.ids[i], 0.0, "target", 0,
                      crm_predict(fit, data.rows[i], &data.schema)});
  } else if (reduction == "pv") {
    PvFit fit = pv_from_json(file.at("payload"));
    FeatureData data = load_features(cfg.get("input"), fit.schema);
    std::vector<double> times = taus.empty() ? fit.taus : taus;
    const char* quantity = fit.quantity.kind == PvKind::survival ? "survival"
                           : fit.quantity.kind == PvKind::rmst   ? "rmst"
                           : fit.quantity.kind == PvKind::cif    ? "cif"
                                                                 : "transition";
    for (size_t i = 0; i < data.rows.size(); ++i)
      for (double t : times)
        rows.push_back({data.ids[i], t, quantity,
                        fit.quantity.kind == PvKind::cif ? fit.quantity.cause : 0,
                        pv_predict(fit, data.rows[i], t, &data.schema)});
  } else {
    throw DataError("unknown reduction in model file: " + reduction);
  }

  OutputTarget target(cfg.get("output"), out);
  write_predictions_csv(target.out(), rows);
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  SurvivalTask train = load_input(cfg);
  if (train.kind != TaskKind::single_event)
    throw DataError("evaluate currently scores single-event tasks");
  SurvivalTask test = cfg.get("test").empty()
                          ? train
                          : load_csv(cfg.get("test"), format_from_config(cfg));

  std::vector<double> train_times, test_times;
  std::vector<int> train_status, test_status;
  for (const auto& r : train.records) {
    train_times.push_back(r.time);
    train_status.push_back(r.status);
  }
  for (const auto& r : test.records) {
    test_times.push_back(r.time);
    test_status.push_back(r.status);
  }
  double tau_max = cfg.get_double("eval.tau-max");
  if (tau_max <= 0) tau_max = default_tau_max(train_times);

  std::vector<SurvivalCurve> curves;
  if (cfg.get("learner") == "km") {
    StepFunction km = kaplan_meier(train_times, train_status);
    curves.assign(test.records.size(), SurvivalCurve::from_step(km));
  } else {
    const std::string& reduction = cfg.get("reduction");
    if (reduction != "pem" && reduction != "dt")
      throw ConfigError("evaluate supports the pem and dt reductions (or learner = km)");
    CutGrid grid = make_cuts(train, cuts_from_config(cfg));
    FittedReduction fit = reduction == "pem"
                              ? pem_fit(train, grid, learner_from_config(cfg),
                                        formula_from_config(cfg))
                              : dt_fit(train, grid, learner_from_config(cfg),
                                       formula_from_config(cfg));
    for (const auto& rec : test.records)
      curves.push_back(predict_survival(fit, rec.features, &test.schema));
  }

  std::vector<double> risk(curves.size());
  for (size_t i = 0; i < curves.size(); ++i) risk[i] = -rmst(curves[i], tau_max);
  double c = harrell_c(risk, test_times, test_status);
  StepFunction g = censoring_km(train_times, train_status);
  double brier = isbs(curves, test_times, test_status, g, tau_max);

  OutputTarget target(cfg.get("output"), out);
  target.out() << "metric,value\n";
  target.out() << "harrell-c," << format_number(c) << "\n";
  target.out() << "isbs," << format_number(brier) << "\n";
  return 0;
}

int cmd_benchmark(const RunConfig& cfg, std::ostream& out) {
  std::vector<std::pair<std::string, SurvivalTask>> tasks;
  auto specs = cfg.get_list("bench.tasks");
  FormatSpec format = format_from_config(cfg);
  if (specs.empty()) {
    if (cfg.get("input").empty())
      throw ConfigError("benchmark needs --bench.tasks name=path pairs or --input");
    tasks.emplace_back("task", load_csv(cfg.get("input"), format));
  } else {
    for (const auto& item : specs) {
      auto eq = item.find('=');
      if (eq == std::string::npos)
        throw ConfigError("bench.tasks entries must be name=path, got '" + item + "'");
      tasks.emplace_back(item.substr(0, eq), load_csv(item.substr(eq + 1), format));
    }
  }

  std::vector<BenchLearner> learners;
  for (const auto& name : cfg.get_list("bench.learners"))
    learners.push_back(default_bench_learner(name));

  BenchmarkOptions options;
  options.folds = cfg.get_int("bench.folds");
  options.repeats = cfg.get_int("bench.repeats");
  options.budget = cfg.get_int("bench.budget");
  options.metric = metric_from_name(cfg.get("metric"));
  options.tau_max = cfg.get_double("eval.tau-max");
  options.seed = static_cast<uint64_t>(cfg.get_int("seed"));
  options.workers = worker_count();

  ScoreTable table = benchmark(tasks, learners, options);
  const std::string& output = cfg.get("output");
  if (output.empty()) {
    table.write_csv(out);
    out << "\n# aggregate (scores scaled by 100)\n";
    table.write_aggregate_csv(out);
  } else {
    std::ofstream score_file(output);
    if (!score_file) throw DataError("cannot write file: " + output);
    table.write_csv(score_file);
    std::ofstream agg_file(output + ".aggregate.csv");
    if (!agg_file) throw DataError("cannot write file: " + output + ".aggregate.csv");
    table.write_aggregate_csv(agg_file);
  }
  return 0;
}

}  // namespace

std::string cli_usage() {
  std::ostringstream s;
  s << "usage: survred <command> [--config FILE] [--key value ...]\n"
    << "\n"
    << "commands:\n"
    << "  transform   write a reduction's transformed dataset plus a state sidecar\n"
    << "  simulate    generate a synthetic survival task CSV\n"
    << "  fit         train a reduction and write the model file\n"
    << "  predict     map model predictions back to survival quantities\n"
    << "  evaluate    fit on --input, score on --test (Harrell's C and ISBS)\n"
    << "  benchmark   cross-validated comparison with KM fallback\n"
    << "\n"
    << "exit codes: 0 ok, 2 config error, 3 data error, 4 numeric failure\n"
    << "environment: SURVRED_WORKERS sets the benchmark worker count\n"
    << "\n"
    << RunConfig::help_text();
  return s.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.empty() || args[0] == "--help" || args[0] == "help" || args[0] == "-h") {
      out << cli_usage();
      return args.empty() ? 2 : 0;
    }
    const std::string command = args[0];
    RunConfig cfg;
    for (size_t i = 1; i < args.size(); ++i) {
      const std::string& arg = args[i];
      if (arg == "--help" || arg == "-h") {
        out << cli_usage();
        return 0;
      }
      if (arg.rfind("--", 0) != 0)
        throw ConfigError("unexpected argument: " + arg);
      std::string key = arg.substr(2);
      std::string value;
      auto eq = key.find('=');
      if (eq != std::string::npos) {
        value = key.substr(eq + 1);
        key = key.substr(0, eq);
      } else {
        if (i + 1 >= args.size()) throw ConfigError("flag --" + key + " expects a value");
        value = args[++i];
      }
      if (key == "config") {
        cfg.load_file(value);
      } else {
        cfg.set(key, value);
      }
    }

    if (command == "transform") return cmd_transform(cfg, out);
    if (command == "simulate") return cmd_simulate(cfg, out);
    if (command == "fit") return cmd_fit(cfg);
    if (command == "predict") return cmd_predict(cfg, out);
    if (command == "evaluate") return cmd_evaluate(cfg, out);
    if (command == "benchmark") return cmd_benchmark(cfg, out);
    throw ConfigError("unknown command: " + command);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace survred
