#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "survred/csv.hpp"

namespace survred {

enum class TaskKind { single_event, competing_risks, multi_state };

enum class FeatureType { numeric, categorical };

// Feature column description. Categorical levels are stored in
// first-appearance order; record values hold the level code (0-based).
struct FeatureSpec {
  std::string name;
  FeatureType type = FeatureType::numeric;
  std::vector<std::string> levels;

  int level_code(const std::string& label) const;  // -1 if unknown
};

struct SubjectRecord {
  std::string id;
  double entry = 0.0;
  double time = 0.0;
  int status = 0;
  int cause = 0;  // 1..q when status = 1 on a competing-risks task, else 0
  std::vector<double> features;
};

struct StartStopRecord {
  std::string id;
  int from_state = 0;
  int to_state = 0;
  int episode = 1;
  double entry = 0.0;
  double exit = 0.0;
  int status = 0;
  std::vector<double> features;
};

struct StateGraph {
  std::vector<std::string> states;           // label per state index
  std::vector<std::pair<int, int>> edges;    // admissible transitions

  int state_index(const std::string& label) const;        // -1 if unknown
  int add_state(const std::string& label);                 // idempotent
  bool has_edge(int from, int to) const;
  int edge_index(int from, int to) const;                  // -1 if absent
  std::vector<int> edges_from(int from) const;             // edge indices, declaration order
  std::string edge_label(int edge) const;                  // "from->to"
};

struct SurvivalTask {
  TaskKind kind = TaskKind::single_event;
  std::vector<FeatureSpec> schema;
  std::vector<SubjectRecord> records;        // single-event / competing-risks
  std::vector<StartStopRecord> episodes;     // multi-state
  std::optional<StateGraph> state_graph;
  std::vector<std::string> cause_labels;     // cause k -> label, k = 1..q

  int cause_count() const { return static_cast<int>(cause_labels.size()); }
  size_t n_subjects() const;
  std::vector<std::string> subject_ids() const;  // unique, first-appearance order
  double max_observed_time() const;
  int event_count() const;
};

struct Violation {
  long row;  // 0-based record index, -1 for task-level problems
  std::string message;
};

// Column role mapping for CSV ingest. Column names not claimed by a role are
// treated as features. Numeric/categorical is inferred per column: any value
// that fails to parse as a number makes the whole column categorical.
struct FormatSpec {
  TaskKind kind = TaskKind::single_event;
  std::string id = "id";
  std::string time = "time";
  std::string status = "status";
  std::string cause = "cause";
  std::string entry = "entry";
  // start-stop roles
  std::string from = "from";
  std::string to = "to";
  std::string episode = "episode";
  std::string tstart = "tstart";
  std::string tstop = "tstop";
  // optional declared vocabularies; discovered in appearance order when empty
  std::vector<std::string> cause_levels;
  std::vector<std::pair<std::string, std::string>> state_edges;
};

SurvivalTask load_csv(const std::string& path, const FormatSpec& spec);
SurvivalTask task_from_table(const CsvTable& table, const FormatSpec& spec);

// Returns every invariant violation; empty iff the task is valid. Never throws.
std::vector<Violation> validate(const SurvivalTask& task);

CsvTable task_to_table(const SurvivalTask& task);
void export_csv(const SurvivalTask& task, const std::string& path);

const char* task_kind_name(TaskKind kind);
TaskKind task_kind_from_name(const std::string& name);

}  // namespace survred
