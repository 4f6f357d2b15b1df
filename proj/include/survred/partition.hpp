#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "survred/survdata.hpp"

namespace survred {

struct CutStrategy {
  enum class Kind {
    equidistant_count,
    equidistant_width,
    event_quantiles,
    all_event_times,
    explicit_cuts
  };
  Kind kind = Kind::event_quantiles;
  int count = 20;
  double width = 0.0;
  std::vector<double> cuts;

  static CutStrategy equidistant(int j);
  static CutStrategy equidistant_width(double w);
  static CutStrategy event_quantiles(int j);
  static CutStrategy all_event_times();
  static CutStrategy explicit_cuts(std::vector<double> cuts);
  // event-quantiles with J = min(20, number of unique event times)
  static CutStrategy default_strategy();
};

// Ordered partition 0 = a_0 < a_1 < ... < a_J of follow-up time.
// Intervals are left-open, right-closed: I_j = (a_{j-1}, a_j].
struct CutGrid {
  std::vector<double> cuts;  // a_1..a_J, strictly increasing, all > 0
  CutStrategy::Kind strategy = CutStrategy::Kind::explicit_cuts;
  bool truncated = false;  // requested quantile count exceeded unique event times

  int size() const { return static_cast<int>(cuts.size()); }
  double lower(int j) const { return j <= 1 ? 0.0 : cuts[static_cast<size_t>(j - 2)]; }
  double upper(int j) const { return cuts[static_cast<size_t>(j - 1)]; }
  double width(int j) const { return upper(j) - lower(j); }
  // 1-based index of the interval containing t; size()+1 when t > a_J
  int interval_of(double t) const;
};

struct LongRow {
  std::string id;
  int j = 0;             // interval index, 1-based
  double t_start = 0.0;  // a_{j-1}
  double t_end = 0.0;    // a_j
  int d = 0;
  double t = 0.0;       // time at risk within the interval
  double offset = 0.0;  // log(t)
  int cause = 0;        // 1..q, 0 when not applicable
  int from_state = -1;
  int to_state = -1;
  int episode = 0;
  std::vector<double> features;
};

struct LongData {
  std::vector<LongRow> rows;
  CutGrid grid;
  TaskKind origin_kind = TaskKind::single_event;
  int cause_count = 1;
  std::vector<FeatureSpec> schema;
  std::optional<StateGraph> state_graph;
  std::vector<std::string> cause_labels;
};

CutGrid make_cuts(const SurvivalTask& task, const CutStrategy& strategy);

LongData expand_single_event(const SurvivalTask& task, const CutGrid& grid);
LongData expand_competing_risks(const SurvivalTask& task, const CutGrid& grid);
LongData expand_multistate(const SurvivalTask& task, const CutGrid& grid);
LongData expand(const SurvivalTask& task, const CutGrid& grid);  // dispatch on kind

void export_long_csv(const LongData& data, std::ostream& out);
void export_long_csv(const LongData& data, const std::string& path);

// type-1 empirical quantile of a sorted sample: smallest x with F(x) >= p
double quantile_type1(const std::vector<double>& sorted, double p);

}  // namespace survred
