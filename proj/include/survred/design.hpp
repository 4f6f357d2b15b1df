#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "survred/survdata.hpp"

namespace survred {

enum class ColumnType { numeric, categorical };

struct Column {
  std::string name;
  ColumnType type = ColumnType::numeric;
  std::vector<double> values;       // level codes for categorical columns
  std::vector<std::string> levels;  // categorical only
};

struct DataTable {
  std::vector<Column> cols;
  size_t nrow = 0;

  const Column* find(const std::string& name) const;
  void add_numeric(const std::string& name, std::vector<double> values);
  void add_categorical(const std::string& name, std::vector<double> codes,
                       std::vector<std::string> levels);
};

// Declares how the model matrix is built from the transformed data.
// "time" refers to the interval end-point column added by the reductions.
struct FormulaSpec {
  enum class TimeForm { omit, numeric, factor };
  TimeForm time = TimeForm::numeric;
  bool all_features = true;           // use every task feature as a main effect
  std::vector<std::string> features;  // explicit subset when all_features is off
  std::vector<std::pair<std::string, std::string>> interactions;

  static FormulaSpec no_features(TimeForm t) {
    FormulaSpec f;
    f.time = t;
    f.all_features = false;
    return f;
  }
};

struct DesignMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd X;

  long rows() const { return X.rows(); }
  long cols() const { return X.cols(); }
};

// Expands a DataTable into a dense numeric matrix: one-hot encoding for
// categoricals (first level in appearance order dropped) plus declared
// pairwise interactions. The fitted encoder is reused at predict time.
class DesignBuilder {
 public:
  void fit(const DataTable& table, const std::vector<std::string>& main_effects,
           const std::vector<std::pair<std::string, std::string>>& interactions);
  DesignMatrix transform(const DataTable& table) const;
  bool fitted() const { return !terms_.empty() || fitted_; }
  bool unknown_level_seen() const { return unknown_level_seen_; }

  struct Term {
    std::string source;
    ColumnType type = ColumnType::numeric;
    std::vector<std::string> levels;
  };
  const std::vector<Term>& terms() const { return terms_; }
  const std::vector<std::pair<int, int>>& interaction_terms() const { return interactions_; }

  // used by serialization
  void restore(std::vector<Term> terms, std::vector<std::pair<int, int>> interactions);

 private:
  std::vector<Term> terms_;                       // main effects, in order
  std::vector<std::pair<int, int>> interactions_;  // indices into terms_
  bool fitted_ = false;
  mutable bool unknown_level_seen_ = false;
};

}  // namespace survred
