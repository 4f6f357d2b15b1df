#include "survred/partition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "survred/error.hpp"

namespace survred {

CutStrategy CutStrategy::equidistant(int j) {
  CutStrategy s;
  s.kind = Kind::equidistant_count;
  s.count = j;
  return s;
}

CutStrategy CutStrategy::equidistant_width(double w) {
  CutStrategy s;
  s.kind = Kind::equidistant_width;
  s.width = w;
  return s;
}

CutStrategy CutStrategy::event_quantiles(int j) {
  CutStrategy s;
  s.kind = Kind::event_quantiles;
  s.count = j;
  return s;
}

CutStrategy CutStrategy::all_event_times() {
  CutStrategy s;
  s.kind = Kind::all_event_times;
  return s;
}

CutStrategy CutStrategy::explicit_cuts(std::vector<double> cuts) {
  CutStrategy s;
  s.kind = Kind::explicit_cuts;
  s.cuts = std::move(cuts);
  return s;
}

CutStrategy CutStrategy::default_strategy() {
  CutStrategy s;
  s.kind = Kind::event_quantiles;
  s.count = 20;
  return s;
}

int CutGrid::interval_of(double t) const {
  auto it = std::lower_bound(cuts.begin(), cuts.end(), t);
  return static_cast<int>(it - cuts.begin()) + 1;
}

double quantile_type1(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DataError("quantile of empty sample");
  const size_t n = sorted.size();
  size_t k = static_cast<size_t>(std::ceil(p * static_cast<double>(n)));
  if (k < 1) k = 1;
  if (k > n) k = n;
  return sorted[k - 1];
}

namespace {

std::vector<double> event_times_sorted(const SurvivalTask& task) {
  std::vector<double> t;
  for (const auto& r : task.records)
    if (r.status == 1) t.push_back(r.time);
  for (const auto& e : task.episodes)
    if (e.status == 1) t.push_back(e.exit);
  std::sort(t.begin(), t.end());
  return t;
}

std::vector<double> dedup(std::vector<double> v) {
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

CutGrid make_cuts(const SurvivalTask& task, const CutStrategy& strategy) {
  CutGrid grid;
  grid.strategy = strategy.kind;
  const double t_max = task.max_observed_time();

  switch (strategy.kind) {
    case CutStrategy::Kind::equidistant_count: {
      if (strategy.count < 1) throw ConfigError("equidistant strategy requires J >= 1");
      for (int j = 1; j <= strategy.count; ++j)
        grid.cuts.push_back(t_max * static_cast<double>(j) / strategy.count);
      break;
    }
    case CutStrategy::Kind::equidistant_width: {
      if (!(strategy.width > 0)) throw ConfigError("equidistant width must be positive");
      int j = 1;
      for (;; ++j) {
        double a = strategy.width * j;
        grid.cuts.push_back(a);
        if (a >= t_max) break;
      }
      break;
    }
    case CutStrategy::Kind::event_quantiles: {
      if (strategy.count < 1) throw ConfigError("event-quantiles strategy requires J >= 1");
      auto events = event_times_sorted(task);
      if (events.empty()) throw DataError("no event times available for cut selection");
      auto uniq = dedup(events);
      int j_req = strategy.count;
      if (j_req > static_cast<int>(uniq.size())) {
        grid.cuts = uniq;
        grid.truncated = true;
      } else {
        for (int k = 1; k <= j_req; ++k)
          grid.cuts.push_back(quantile_type1(events, static_cast<double>(k) / j_req));
        grid.cuts = dedup(grid.cuts);
        if (static_cast<int>(grid.cuts.size()) < j_req) grid.truncated = true;
      }
      if (grid.cuts.back() < t_max) grid.cuts.push_back(t_max);
      break;
    }
    case CutStrategy::Kind::all_event_times: {
      auto uniq = dedup(event_times_sorted(task));
      if (uniq.empty()) throw DataError("no event times available for cut selection");
      grid.cuts = uniq;
      if (grid.cuts.back() < t_max) grid.cuts.push_back(t_max);
      break;
    }
    case CutStrategy::Kind::explicit_cuts: {
      grid.cuts = strategy.cuts;
      if (grid.cuts.empty()) throw ConfigError("explicit cut list must not be empty");
      for (size_t i = 0; i < grid.cuts.size(); ++i) {
        if (grid.cuts[i] <= 0) throw ConfigError("all cuts must be positive");
        if (i > 0 && grid.cuts[i] <= grid.cuts[i - 1])
          throw ConfigError("cuts must be strictly increasing");
      }
      if (grid.cuts.back() < t_max)
        throw DataError("explicit cut grid does not cover the maximum observed time");
      break;
    }
  }
  return grid;
}

namespace {

// Emit the expansion of a single at-risk window (entry, stop] with the given
// terminal event indicator. Shared by all three task kinds.
template <typename RowFn>
void expand_window(const CutGrid& grid, double entry, double stop, int terminal_d,
                   RowFn&& emit) {
  const int j_last = grid.interval_of(stop);
  if (j_last > grid.size())
    throw DataError("observed time " + format_number(stop) +
                    " exceeds the cut grid (grid must cover data)");
  // first interval with positive overlap of (entry, stop]
  auto it = std::upper_bound(grid.cuts.begin(), grid.cuts.end(), entry);
  int j_first = static_cast<int>(it - grid.cuts.begin()) + 1;
  for (int j = j_first; j <= j_last; ++j) {
    double lo = std::max(grid.lower(j), entry);
    double hi = (j == j_last) ? stop : grid.upper(j);
    LongRow row;
    row.j = j;
    row.t_start = grid.lower(j);
    row.t_end = grid.upper(j);
    row.d = (j == j_last) ? terminal_d : 0;
    row.t = hi - lo;
    row.offset = std::log(row.t);
    emit(std::move(row));
  }
}

LongData base_long(const SurvivalTask& task, const CutGrid& grid) {
  LongData out;
  out.grid = grid;
  out.origin_kind = task.kind;
  out.schema = task.schema;
  out.cause_labels = task.cause_labels;
  out.cause_count = std::max(1, task.cause_count());
  out.state_graph = task.state_graph;
  return out;
}

}  // namespace

LongData expand_single_event(const SurvivalTask& task, const CutGrid& grid) {
  if (task.kind != TaskKind::single_event)
    throw DataError("expand_single_event requires a single-event task");
  LongData out = base_long(task, grid);
  for (const auto& rec : task.records) {
    expand_window(grid, rec.entry, rec.time, rec.status, [&](LongRow row) {
      row.id = rec.id;
      row.features = rec.features;
      out.rows.push_back(std::move(row));
    });
  }
  return out;
}

LongData expand_competing_risks(const SurvivalTask& task, const CutGrid& grid) {
  if (task.kind != TaskKind::competing_risks)
    throw DataError("expand_competing_risks requires a competing-risks task");
  LongData out = base_long(task, grid);
  const int q = task.cause_count();
  for (const auto& rec : task.records) {
    for (int k = 1; k <= q; ++k) {
      // in the cause-k copy, events of any other cause count as censoring
      int d_k = (rec.status == 1 && rec.cause == k) ? 1 : 0;
      expand_window(grid, rec.entry, rec.time, d_k, [&](LongRow row) {
        row.id = rec.id;
        row.cause = k;
        row.features = rec.features;
        out.rows.push_back(std::move(row));
      });
    }
  }
  return out;
}

LongData expand_multistate(const SurvivalTask& task, const CutGrid& grid) {
  if (task.kind != TaskKind::multi_state || !task.state_graph)
    throw DataError("expand_multistate requires a multi-state task with a state graph");
  LongData out = base_long(task, grid);
  const StateGraph& g = *task.state_graph;
  for (const auto& rec : task.episodes) {
    if (!g.has_edge(rec.from_state, rec.to_state))
      throw DataError("episode transition is not an edge of the state graph");
    // actual transition plus counterfactual rows for every competing
    // transition out of from_state, over the same at-risk window
    for (int edge : g.edges_from(rec.from_state)) {
      int to = g.edges[static_cast<size_t>(edge)].second;
      int d_e = (rec.status == 1 && to == rec.to_state) ? 1 : 0;
      expand_window(grid, rec.entry, rec.exit, d_e, [&](LongRow row) {
        row.id = rec.id;
        row.from_state = rec.from_state;
        row.to_state = to;
        row.episode = rec.episode;
        row.features = rec.features;
        out.rows.push_back(std::move(row));
      });
    }
  }
  return out;
}

LongData expand(const SurvivalTask& task, const CutGrid& grid) {
  switch (task.kind) {
    case TaskKind::single_event: return expand_single_event(task, grid);
    case TaskKind::competing_risks: return expand_competing_risks(task, grid);
    case TaskKind::multi_state: return expand_multistate(task, grid);
  }
  throw DataError("unknown task kind");
}

void export_long_csv(const LongData& data, std::ostream& out) {
  const bool with_cause = data.origin_kind == TaskKind::competing_risks;
  const bool with_transition = data.origin_kind == TaskKind::multi_state;
  out << "id,j,tstart,tend,d,t,offset";
  if (with_cause) out << ",cause";
  if (with_transition) out << ",from,to,episode";
  for (const auto& fs : data.schema) out << ',' << csv_quote(fs.name);
  out << '\n';
  for (const auto& row : data.rows) {
    out << csv_quote(row.id) << ',' << row.j << ',' << format_number(row.t_start) << ','
        << format_number(row.t_end) << ',' << row.d << ',' << format_number(row.t) << ','
        << format_number(row.offset);
    if (with_cause) out << ',' << row.cause;
    if (with_transition) {
      const auto& g = *data.state_graph;
      out << ',' << csv_quote(g.states[static_cast<size_t>(row.from_state)]) << ','
          << csv_quote(g.states[static_cast<size_t>(row.to_state)]) << ',' << row.episode;
    }
    for (size_t f = 0; f < data.schema.size(); ++f) {
      const auto& fs = data.schema[f];
      out << ',';
      if (fs.type == FeatureType::categorical)
        out << csv_quote(fs.levels[static_cast<size_t>(row.features[f])]);
      else
        out << format_number(row.features[f]);
    }
    out << '\n';
  }
}

void export_long_csv(const LongData& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  export_long_csv(data, out);
}

}  // namespace survred
