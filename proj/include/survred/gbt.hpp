#pragma once

#include <string>
#include <vector>

#include "survred/design.hpp"

namespace survred {

enum class GbtLoss { poisson, logistic, squared };

struct GbtParams {
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_leaf = 10;
  int nrounds = 200;
  int early_stop_rounds = 0;  // 0 disables early stopping
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf value on the link scale, learning rate applied
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root
  double predict_row(const DesignMatrix& X, long row) const;
};

struct GbtFit {
  GbtLoss loss = GbtLoss::squared;
  GbtParams params;
  double base_score = 0.0;
  std::vector<Tree> trees;
  int best_iteration = 0;  // number of trees used for prediction
  std::vector<double> train_loss;  // mean loss after each round
  std::vector<double> valid_loss;  // entry 0 is the base score, then per round
};

struct GbtData {
  const DesignMatrix* X = nullptr;
  const std::vector<double>* y = nullptr;
  const std::vector<double>* offset = nullptr;   // poisson only
  const std::vector<double>* weights = nullptr;
};

// Stagewise second-order boosting on the link scale with exact greedy splits.
// Split ties are broken by lowest column index, then lowest threshold.
GbtFit fit_gbt(const DesignMatrix& X, const std::vector<double>& y,
               const std::vector<double>* offset, const std::vector<double>* weights,
               GbtLoss loss, const GbtParams& params, const GbtData* valid = nullptr);

std::vector<double> predict_link(const GbtFit& fit, const DesignMatrix& X);
std::vector<double> predict_response(const GbtFit& fit, const DesignMatrix& X);

const char* gbt_loss_name(GbtLoss loss);
GbtLoss gbt_loss_from_name(const std::string& s);

}  // namespace survred
