#include "survred/survdata.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "survred/error.hpp"

namespace survred {

int FeatureSpec::level_code(const std::string& label) const {
  for (size_t i = 0; i < levels.size(); ++i)
    if (levels[i] == label) return static_cast<int>(i);
  return -1;
}

int StateGraph::state_index(const std::string& label) const {
  for (size_t i = 0; i < states.size(); ++i)
    if (states[i] == label) return static_cast<int>(i);
  return -1;
}

int StateGraph::add_state(const std::string& label) {
  int idx = state_index(label);
  if (idx >= 0) return idx;
  states.push_back(label);
  return static_cast<int>(states.size()) - 1;
}

bool StateGraph::has_edge(int from, int to) const {
  return edge_index(from, to) >= 0;
}

int StateGraph::edge_index(int from, int to) const {
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].first == from && edges[i].second == to) return static_cast<int>(i);
  return -1;
}

std::vector<int> StateGraph::edges_from(int from) const {
  std::vector<int> out;
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].first == from) out.push_back(static_cast<int>(i));
  return out;
}

std::string StateGraph::edge_label(int edge) const {
  const auto& e = edges[static_cast<size_t>(edge)];
  return states[static_cast<size_t>(e.first)] + "->" + states[static_cast<size_t>(e.second)];
}

size_t SurvivalTask::n_subjects() const { return subject_ids().size(); }

std::vector<std::string> SurvivalTask::subject_ids() const {
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  auto push = [&](const std::string& id) {
    if (seen.insert(id).second) ids.push_back(id);
  };
  for (const auto& r : records) push(r.id);
  for (const auto& e : episodes) push(e.id);
  return ids;
}

double SurvivalTask::max_observed_time() const {
  double m = 0.0;
  for (const auto& r : records) m = std::max(m, r.time);
  for (const auto& e : episodes) m = std::max(m, e.exit);
  return m;
}

int SurvivalTask::event_count() const {
  int n = 0;
  for (const auto& r : records) n += r.status;
  for (const auto& e : episodes) n += e.status;
  return n;
}

const char* task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::single_event: return "single-event";
    case TaskKind::competing_risks: return "competing-risks";
    case TaskKind::multi_state: return "multi-state";
  }
  return "?";
}

TaskKind task_kind_from_name(const std::string& name) {
  if (name == "single-event") return TaskKind::single_event;
  if (name == "competing-risks") return TaskKind::competing_risks;
  if (name == "multi-state") return TaskKind::multi_state;
  throw ConfigError("unknown task kind: " + name +
                    " (expected single-event, competing-risks or multi-state)");
}

namespace {

struct ColumnReader {
  int index = -1;
  bool required = false;
  std::string name;
};

[[noreturn]] void row_error(size_t row, const std::string& msg) {
  // +2: 1-based counting plus the header row
  throw DataError("row " + std::to_string(row + 2) + ": " + msg);
}

double parse_time_field(const CsvTable& t, size_t row, int col, const std::string& what) {
  double v;
  if (!parse_number(t.rows[row][static_cast<size_t>(col)], v))
    row_error(row, "non-numeric " + what + " value '" + t.rows[row][static_cast<size_t>(col)] + "'");
  return v;
}

int parse_status_field(const CsvTable& t, size_t row, int col) {
  const std::string& s = t.rows[row][static_cast<size_t>(col)];
  if (s == "0") return 0;
  if (s == "1") return 1;
  row_error(row, "status must be exactly 0 or 1, got '" + s + "'");
}

int require_column(const CsvTable& t, const std::string& name) {
  int idx = t.column(name);
  if (idx < 0) throw DataError("missing required column '" + name + "'");
  return idx;
}

}  // namespace

SurvivalTask task_from_table(const CsvTable& table, const FormatSpec& spec) {
  SurvivalTask task;
  task.kind = spec.kind;

  std::set<std::string> role_names;
  const bool startstop = spec.kind == TaskKind::multi_state;
  int c_id = require_column(table, spec.id);
  role_names.insert(spec.id);
  int c_time = -1, c_status = -1, c_cause = -1, c_entry = -1;
  int c_from = -1, c_to = -1, c_episode = -1, c_tstart = -1, c_tstop = -1;
  if (startstop) {
    c_from = require_column(table, spec.from);
    c_to = require_column(table, spec.to);
    c_episode = require_column(table, spec.episode);
    c_tstart = require_column(table, spec.tstart);
    c_tstop = require_column(table, spec.tstop);
    c_status = require_column(table, spec.status);
    role_names.insert({spec.from, spec.to, spec.episode, spec.tstart, spec.tstop, spec.status});
  } else {
    c_time = require_column(table, spec.time);
    c_status = require_column(table, spec.status);
    role_names.insert({spec.time, spec.status});
    c_cause = table.column(spec.cause);
    if (spec.kind == TaskKind::competing_risks && c_cause < 0)
      throw DataError("missing required column '" + spec.cause + "' for competing-risks task");
    if (c_cause >= 0) role_names.insert(spec.cause);
    c_entry = table.column(spec.entry);  // entry defaults to 0 when absent
    if (c_entry >= 0) role_names.insert(spec.entry);
  }

  // remaining columns are features; detect type per column
  std::vector<int> feat_cols;
  for (size_t c = 0; c < table.header.size(); ++c) {
    if (role_names.count(table.header[c])) continue;
    feat_cols.push_back(static_cast<int>(c));
    FeatureSpec fs;
    fs.name = table.header[c];
    fs.type = FeatureType::numeric;
    for (size_t r = 0; r < table.nrow(); ++r) {
      const std::string& v = table.rows[r][c];
      if (v.empty()) row_error(r, "missing value in feature column '" + fs.name + "'");
      double d;
      if (!parse_number(v, d)) {
        fs.type = FeatureType::categorical;
        break;
      }
    }
    task.schema.push_back(std::move(fs));
  }
  {
    std::set<std::string> names;
    for (const auto& fs : task.schema)
      if (!names.insert(fs.name).second)
        throw DataError("duplicate feature column '" + fs.name + "'");
  }

  auto read_features = [&](size_t r) {
    std::vector<double> out(feat_cols.size());
    for (size_t f = 0; f < feat_cols.size(); ++f) {
      const std::string& v = table.rows[r][static_cast<size_t>(feat_cols[f])];
      FeatureSpec& fs = task.schema[f];
      if (fs.type == FeatureType::numeric) {
        double d;
        if (!parse_number(v, d))
          row_error(r, "non-numeric value '" + v + "' in numeric column '" + fs.name + "'");
        if (!std::isfinite(d))
          row_error(r, "non-finite value in column '" + fs.name + "'");
        out[f] = d;
      } else {
        int code = fs.level_code(v);
        if (code < 0) {
          fs.levels.push_back(v);
          code = static_cast<int>(fs.levels.size()) - 1;
        }
        out[f] = static_cast<double>(code);
      }
    }
    return out;
  };

  if (startstop) {
    StateGraph graph;
    for (const auto& e : spec.state_edges) {
      int a = graph.add_state(e.first), b = graph.add_state(e.second);
      if (!graph.has_edge(a, b)) graph.edges.emplace_back(a, b);
    }
    const bool declared = !spec.state_edges.empty();
    for (size_t r = 0; r < table.nrow(); ++r) {
      StartStopRecord rec;
      rec.id = table.rows[r][static_cast<size_t>(c_id)];
      const std::string& from_label = table.rows[r][static_cast<size_t>(c_from)];
      const std::string& to_label = table.rows[r][static_cast<size_t>(c_to)];
      if (declared) {
        rec.from_state = graph.state_index(from_label);
        rec.to_state = graph.state_index(to_label);
        if (rec.from_state < 0 || rec.to_state < 0 ||
            !graph.has_edge(rec.from_state, rec.to_state))
          row_error(r, "transition " + from_label + "->" + to_label +
                           " is not an edge of the declared state graph");
      } else {
        rec.from_state = graph.add_state(from_label);
        rec.to_state = graph.add_state(to_label);
        if (!graph.has_edge(rec.from_state, rec.to_state))
          graph.edges.emplace_back(rec.from_state, rec.to_state);
      }
      double ep = parse_time_field(table, r, c_episode, "episode");
      if (ep < 1 || ep != std::floor(ep))
        row_error(r, "episode must be a positive integer");
      rec.episode = static_cast<int>(ep);
      rec.entry = parse_time_field(table, r, c_tstart, "entry time");
      rec.exit = parse_time_field(table, r, c_tstop, "exit time");
      if (rec.exit <= rec.entry)
        row_error(r, "exit time must exceed entry time");
      rec.status = parse_status_field(table, r, c_status);
      rec.features = read_features(r);
      task.episodes.push_back(std::move(rec));
    }
    task.state_graph = std::move(graph);
  } else {
    std::vector<std::string> cause_labels = spec.cause_levels;
    for (size_t r = 0; r < table.nrow(); ++r) {
      SubjectRecord rec;
      rec.id = table.rows[r][static_cast<size_t>(c_id)];
      rec.time = parse_time_field(table, r, c_time, "time");
      rec.status = parse_status_field(table, r, c_status);
      if (c_entry >= 0) rec.entry = parse_time_field(table, r, c_entry, "entry time");
      if (rec.time <= rec.entry)
        row_error(r, "time must exceed entry");
      if (rec.entry < 0) row_error(r, "entry time must be non-negative");
      if (c_cause >= 0) {
        const std::string& label = table.rows[r][static_cast<size_t>(c_cause)];
        if (rec.status == 1) {
          auto it = std::find(cause_labels.begin(), cause_labels.end(), label);
          if (it == cause_labels.end()) {
            if (!spec.cause_levels.empty())
              row_error(r, "unknown cause label '" + label + "'");
            cause_labels.push_back(label);
            rec.cause = static_cast<int>(cause_labels.size());
          } else {
            rec.cause = static_cast<int>(it - cause_labels.begin()) + 1;
          }
        }
      }
      rec.features = read_features(r);
      task.records.push_back(std::move(rec));
    }
    task.cause_labels = std::move(cause_labels);
  }

  auto violations = validate(task);
  if (!violations.empty()) {
    std::string msg = "task failed validation:";
    for (const auto& v : violations) {
      msg += "\n  ";
      if (v.row >= 0) msg += "record " + std::to_string(v.row + 1) + ": ";
      msg += v.message;
    }
    throw DataError(msg);
  }
  return task;
}

SurvivalTask load_csv(const std::string& path, const FormatSpec& spec) {
  return task_from_table(read_csv_file(path), spec);
}

std::vector<Violation> validate(const SurvivalTask& task) {
  std::vector<Violation> out;
  auto add = [&out](long row, std::string msg) { out.push_back({row, std::move(msg)}); };

  const size_t nfeat = task.schema.size();
  if (task.kind == TaskKind::multi_state) {
    if (!task.state_graph)
      add(-1, "multi-state task requires a state graph");
    if (!task.records.empty())
      add(-1, "multi-state task must use start-stop records only");
    for (size_t r = 0; r < task.episodes.size(); ++r) {
      const auto& e = task.episodes[r];
      long row = static_cast<long>(r);
      if (e.exit <= e.entry) add(row, "exit time must exceed entry time");
      if (e.entry < 0) add(row, "entry time must be non-negative");
      if (e.status != 0 && e.status != 1) add(row, "status must be 0 or 1");
      if (e.episode < 1) add(row, "episode must be >= 1");
      if (e.features.size() != nfeat) add(row, "feature vector length does not match schema");
      if (task.state_graph && !task.state_graph->has_edge(e.from_state, e.to_state))
        add(row, "transition is not an edge of the state graph");
    }
    // non-overlapping (entry, exit] windows per (subject, transition)
    std::unordered_map<std::string, std::vector<std::pair<double, double>>> windows;
    for (size_t r = 0; r < task.episodes.size(); ++r) {
      const auto& e = task.episodes[r];
      std::string key = e.id + "\x1f" + std::to_string(e.from_state) + "\x1f" +
                        std::to_string(e.to_state);
      for (const auto& w : windows[key]) {
        if (e.entry < w.second && w.first < e.exit) {
          add(static_cast<long>(r),
              "overlapping episode windows for subject " + e.id + " on transition " +
                  (task.state_graph ? task.state_graph->edge_label(
                                          task.state_graph->edge_index(e.from_state, e.to_state))
                                    : std::string("?")));
          break;
        }
      }
      windows[key].emplace_back(e.entry, e.exit);
    }
  } else {
    if (!task.episodes.empty())
      add(-1, "start-stop records are only valid on multi-state tasks");
    for (size_t r = 0; r < task.records.size(); ++r) {
      const auto& rec = task.records[r];
      long row = static_cast<long>(r);
      if (rec.time <= rec.entry) add(row, "time must exceed entry");
      if (rec.entry < 0) add(row, "entry time must be non-negative");
      if (rec.status != 0 && rec.status != 1) add(row, "status must be 0 or 1");
      if (rec.cause != 0 && rec.status != 1)
        add(row, "cause label requires status = 1");
      if (rec.cause < 0 || rec.cause > task.cause_count())
        add(row, "cause index out of range");
      if (task.kind == TaskKind::competing_risks && rec.status == 1 && rec.cause == 0)
        add(row, "event record on a competing-risks task must carry a cause");
      if (rec.features.size() != nfeat) add(row, "feature vector length does not match schema");
    }
    if (task.kind == TaskKind::single_event && !task.cause_labels.empty())
      add(-1, "single-event task must not carry cause labels");
    if (task.kind == TaskKind::competing_risks && task.cause_count() < 2)
      add(-1, "q >= 2 causes required for a competing-risks task");
  }

  if (task.event_count() == 0)
    add(-1, "task has no events (at least one record with status = 1 required)");

  for (const auto& fs : task.schema) {
    if (fs.type == FeatureType::categorical) {
      std::set<std::string> uniq(fs.levels.begin(), fs.levels.end());
      if (uniq.size() != fs.levels.size())
        add(-1, "duplicate levels in categorical feature '" + fs.name + "'");
    }
  }
  return out;
}

CsvTable task_to_table(const SurvivalTask& task) {
  CsvTable t;
  auto feature_field = [&](const FeatureSpec& fs, double v) -> std::string {
    if (fs.type == FeatureType::categorical)
      return fs.levels[static_cast<size_t>(v)];
    return format_number(v);
  };

  if (task.kind == TaskKind::multi_state) {
    t.header = {"id", "from", "to", "episode", "tstart", "tstop", "status"};
    for (const auto& fs : task.schema) t.header.push_back(fs.name);
    const auto& g = *task.state_graph;
    for (const auto& e : task.episodes) {
      std::vector<std::string> row = {
          e.id,
          g.states[static_cast<size_t>(e.from_state)],
          g.states[static_cast<size_t>(e.to_state)],
          std::to_string(e.episode),
          format_number(e.entry),
          format_number(e.exit),
          std::to_string(e.status)};
      for (size_t f = 0; f < task.schema.size(); ++f)
        row.push_back(feature_field(task.schema[f], e.features[f]));
      t.rows.push_back(std::move(row));
    }
    return t;
  }

  bool with_cause = task.kind == TaskKind::competing_risks;
  bool with_entry = false;
  for (const auto& r : task.records) with_entry = with_entry || r.entry != 0.0;
  t.header = {"id", "time", "status"};
  if (with_cause) t.header.push_back("cause");
  if (with_entry) t.header.push_back("entry");
  for (const auto& fs : task.schema) t.header.push_back(fs.name);
  for (const auto& r : task.records) {
    std::vector<std::string> row = {r.id, format_number(r.time), std::to_string(r.status)};
    if (with_cause)
      row.push_back(r.cause > 0 ? task.cause_labels[static_cast<size_t>(r.cause - 1)]
                                : std::string("0"));
    if (with_entry) row.push_back(format_number(r.entry));
    for (size_t f = 0; f < task.schema.size(); ++f)
      row.push_back(feature_field(task.schema[f], r.features[f]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void export_csv(const SurvivalTask& task, const std::string& path) {
  write_csv_file(path, task_to_table(task));
}

}  // namespace survred
