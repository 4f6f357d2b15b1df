#include "survred/design.hpp"

#include <algorithm>
#include <cmath>

#include "survred/error.hpp"

namespace survred {

const Column* DataTable::find(const std::string& name) const {
  for (const auto& c : cols)
    if (c.name == name) return &c;
  return nullptr;
}

void DataTable::add_numeric(const std::string& name, std::vector<double> values) {
  if ((!cols.empty() || nrow > 0) && values.size() != nrow)
    throw DataError("column length mismatch for '" + name + "'");
  nrow = values.size();
  cols.push_back({name, ColumnType::numeric, std::move(values), {}});
}

void DataTable::add_categorical(const std::string& name, std::vector<double> codes,
                                std::vector<std::string> levels) {
  if ((!cols.empty() || nrow > 0) && codes.size() != nrow)
    throw DataError("column length mismatch for '" + name + "'");
  nrow = codes.size();
  cols.push_back({name, ColumnType::categorical, std::move(codes), std::move(levels)});
}

namespace {

int find_term(const std::vector<DesignBuilder::Term>& terms, const std::string& name) {
  for (size_t i = 0; i < terms.size(); ++i)
    if (terms[i].source == name) return static_cast<int>(i);
  return -1;
}

}  // namespace

void DesignBuilder::fit(const DataTable& table, const std::vector<std::string>& main_effects,
                        const std::vector<std::pair<std::string, std::string>>& interactions) {
  terms_.clear();
  interactions_.clear();
  for (const auto& name : main_effects) {
    const Column* col = table.find(name);
    if (!col) throw DataError("formula refers to unknown column '" + name + "'");
    Term t;
    t.source = name;
    t.type = col->type;
    t.levels = col->levels;
    terms_.push_back(std::move(t));
  }
  for (const auto& [a, b] : interactions) {
    int ia = find_term(terms_, a);
    int ib = find_term(terms_, b);
    if (ia < 0 || ib < 0)
      throw DataError("interaction " + a + ":" + b + " refers to a column not in the formula");
    interactions_.emplace_back(ia, ib);
  }
  fitted_ = true;
}

void DesignBuilder::restore(std::vector<Term> terms, std::vector<std::pair<int, int>> interactions) {
  terms_ = std::move(terms);
  interactions_ = std::move(interactions);
  fitted_ = true;
}

namespace {

// Re-encode a categorical column against the training levels by label.
// Unknown labels map to -1 (the reference level representation).
std::vector<int> recode(const Column& col, const std::vector<std::string>& train_levels,
                        bool* unknown_seen) {
  std::vector<int> map_code(col.levels.size(), -1);
  for (size_t c = 0; c < col.levels.size(); ++c) {
    auto it = std::find(train_levels.begin(), train_levels.end(), col.levels[c]);
    if (it != train_levels.end()) map_code[c] = static_cast<int>(it - train_levels.begin());
  }
  std::vector<int> out(col.values.size());
  for (size_t r = 0; r < col.values.size(); ++r) {
    size_t code = static_cast<size_t>(col.values[r]);
    if (code >= map_code.size())
      throw DataError("categorical code out of range in column '" + col.name + "'");
    out[r] = map_code[code];
    if (out[r] < 0) *unknown_seen = true;
  }
  return out;
}

}  // namespace

DesignMatrix DesignBuilder::transform(const DataTable& table) const {
  if (!fitted_) throw DataError("design builder is not fitted");
  const size_t n = table.nrow;

  // expanded block per main-effect term
  struct Block {
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;
  };
  std::vector<Block> blocks(terms_.size());
  for (size_t t = 0; t < terms_.size(); ++t) {
    const Term& term = terms_[t];
    const Column* col = table.find(term.source);
    if (!col) throw DataError("missing column '" + term.source + "' at transform time");
    Block blk;
    if (term.type == ColumnType::numeric) {
      if (col->type != ColumnType::numeric)
        throw DataError("column '" + term.source + "' changed type between fit and transform");
      blk.names.push_back(term.source);
      blk.cols.push_back(col->values);
    } else {
      if (col->type != ColumnType::categorical)
        throw DataError("column '" + term.source + "' changed type between fit and transform");
      auto codes = recode(*col, term.levels, &unknown_level_seen_);
      // reference level (code 0) dropped
      for (size_t l = 1; l < term.levels.size(); ++l) {
        blk.names.push_back(term.source + "=" + term.levels[l]);
        std::vector<double> v(n, 0.0);
        for (size_t r = 0; r < n; ++r)
          if (codes[r] == static_cast<int>(l)) v[r] = 1.0;
        blk.cols.push_back(std::move(v));
      }
    }
    blocks[t] = std::move(blk);
  }

  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  for (auto& blk : blocks) {
    for (size_t c = 0; c < blk.cols.size(); ++c) {
      names.push_back(blk.names[c]);
      cols.push_back(blk.cols[c]);
    }
  }
  for (const auto& [ia, ib] : interactions_) {
    const Block& a = blocks[static_cast<size_t>(ia)];
    const Block& b = blocks[static_cast<size_t>(ib)];
    for (size_t ca = 0; ca < a.cols.size(); ++ca)
      for (size_t cb = 0; cb < b.cols.size(); ++cb) {
        names.push_back(a.names[ca] + ":" + b.names[cb]);
        std::vector<double> v(n);
        for (size_t r = 0; r < n; ++r) v[r] = a.cols[ca][r] * b.cols[cb][r];
        cols.push_back(std::move(v));
      }
  }

  {
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw DataError("duplicate design column names");
  }

  DesignMatrix dm;
  dm.names = std::move(names);
  dm.X.resize(static_cast<long>(n), static_cast<long>(cols.size()));
  for (size_t c = 0; c < cols.size(); ++c)
    for (size_t r = 0; r < n; ++r) {
      double v = cols[c][r];
      if (!std::isfinite(v))
        throw NumericError("non-finite value in design column '" + dm.names[c] + "'");
      dm.X(static_cast<long>(r), static_cast<long>(c)) = v;
    }
  return dm;
}

}  // namespace survred
