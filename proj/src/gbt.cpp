#include "survred/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "survred/error.hpp"

namespace survred {

double Tree::predict_row(const DesignMatrix& X, long row) const {
  int node = 0;
  while (nodes[static_cast<size_t>(node)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<size_t>(node)];
    node = X.X(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<size_t>(node)].value;
}

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {  // log(1 + exp(x)), stable
  if (x > 35) return x;
  if (x < -35) return std::exp(x);
  return std::log1p(std::exp(x));
}

struct LossOps {
  GbtLoss loss;

  // F: link prediction without offset; lp = F + offset for poisson
  void grad_hess(double f, double off, double y, double w, double& g, double& h) const {
    switch (loss) {
      case GbtLoss::poisson: {
        double mu = std::exp(f + off);
        g = w * (mu - y);
        h = std::max(w * mu, 0.0);
        break;
      }
      case GbtLoss::logistic: {
        double p = sigmoid(f);
        g = w * (p - y);
        h = std::max(w * p * (1.0 - p), 1e-16 * w);
        break;
      }
      case GbtLoss::squared:
        g = w * (f - y);
        h = w;
        break;
    }
  }

  double point_loss(double f, double off, double y, double w) const {
    switch (loss) {
      case GbtLoss::poisson: {
        double lp = f + off;
        return w * (std::exp(lp) - y * lp);
      }
      case GbtLoss::logistic:
        return w * (softplus(f) - y * f);
      case GbtLoss::squared: {
        double r = f - y;
        return 0.5 * w * r * r;
      }
    }
    return 0.0;
  }
};

double mean_loss(const LossOps& ops, const std::vector<double>& f,
                 const std::vector<double>& off, const std::vector<double>& y,
                 const std::vector<double>& w) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    num += ops.point_loss(f[i], off[i], y[i], w[i]);
    den += w[i];
  }
  return den > 0 ? num / den : 0.0;
}

struct NodeStats {
  double g = 0.0, h = 0.0;
  long count = 0;
};

struct BestSplit {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

double leaf_gain(double g, double h) { return 0.5 * g * g / (h + 1e-12); }

}  // namespace

GbtFit fit_gbt(const DesignMatrix& X, const std::vector<double>& y,
               const std::vector<double>* offset, const std::vector<double>* weights,
               GbtLoss loss, const GbtParams& params, const GbtData* valid) {
  const long n = X.rows();
  const long p = X.cols();
  if (static_cast<size_t>(n) != y.size()) throw DataError("response length mismatch");
  if (offset && offset->size() != y.size()) throw DataError("offset length mismatch");
  if (weights && weights->size() != y.size()) throw DataError("weights length mismatch");
  if (params.nrounds < 0 || params.max_depth < 1 || params.min_leaf < 1)
    throw ConfigError("invalid boosting parameters");
  if (params.early_stop_rounds > 0 && (!valid || valid->X == nullptr || valid->X->rows() == 0))
    throw ConfigError("early stopping requested without a validation holdout");
  if (offset && loss != GbtLoss::poisson)
    throw ConfigError("offsets are only supported with the poisson loss");

  std::vector<double> w(static_cast<size_t>(n), 1.0), off(static_cast<size_t>(n), 0.0);
  if (weights) w = *weights;
  if (offset) off = *offset;
  for (size_t i = 0; i < w.size(); ++i)
    if (!(w[i] >= 0)) throw DataError("weights must be non-negative");

  LossOps ops{loss};
  GbtFit fit;
  fit.loss = loss;
  fit.params = params;

  // base score: link of the weighted mean response
  {
    double sw = 0.0, sy = 0.0, se = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
      sw += w[i];
      sy += w[i] * y[i];
      se += w[i] * std::exp(off[i]);
    }
    if (sw <= 0) throw DataError("all observation weights are zero");
    switch (loss) {
      case GbtLoss::poisson:
        fit.base_score = std::log(std::max(sy, 1e-12) / std::max(se, 1e-300));
        break;
      case GbtLoss::logistic: {
        double m = std::min(std::max(sy / sw, 1e-12), 1.0 - 1e-12);
        fit.base_score = std::log(m / (1.0 - m));
        break;
      }
      case GbtLoss::squared:
        fit.base_score = sy / sw;
        break;
    }
  }

  std::vector<double> f(static_cast<size_t>(n), fit.base_score);

  // validation state
  std::vector<double> fv, yv, wv, offv;
  long nv = 0;
  if (valid && valid->X) {
    nv = valid->X->rows();
    fv.assign(static_cast<size_t>(nv), fit.base_score);
    yv = *valid->y;
    wv = valid->weights ? *valid->weights : std::vector<double>(static_cast<size_t>(nv), 1.0);
    offv = valid->offset ? *valid->offset : std::vector<double>(static_cast<size_t>(nv), 0.0);
    fit.valid_loss.push_back(mean_loss(ops, fv, offv, yv, wv));
  }

  // presorted row indices per feature, computed once
  std::vector<std::vector<int>> sorted(static_cast<size_t>(p));
  for (long c = 0; c < p; ++c) {
    auto& idx = sorted[static_cast<size_t>(c)];
    idx.resize(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = static_cast<int>(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return X.X(a, c) < X.X(b, c); });
  }

  std::vector<double> g(static_cast<size_t>(n)), h(static_cast<size_t>(n));
  std::vector<int> node_of(static_cast<size_t>(n));
  double best_valid = std::numeric_limits<double>::infinity();
  int since_best = 0;
  if (nv > 0) best_valid = fit.valid_loss[0];

  for (int round = 0; round < params.nrounds; ++round) {
    for (long i = 0; i < n; ++i) {
      ops.grad_hess(f[static_cast<size_t>(i)], off[static_cast<size_t>(i)],
                    y[static_cast<size_t>(i)], w[static_cast<size_t>(i)],
                    g[static_cast<size_t>(i)], h[static_cast<size_t>(i)]);
      if (!std::isfinite(g[static_cast<size_t>(i)]) || !std::isfinite(h[static_cast<size_t>(i)]))
        throw NumericError("non-finite gradient at boosting round " + std::to_string(round + 1));
    }

    Tree tree;
    tree.nodes.push_back(TreeNode{});
    std::fill(node_of.begin(), node_of.end(), 0);
    std::vector<int> frontier = {0};

    for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
      const int width = static_cast<int>(tree.nodes.size());
      std::vector<NodeStats> stats(static_cast<size_t>(width));
      for (long i = 0; i < n; ++i) {
        int nd = node_of[static_cast<size_t>(i)];
        if (nd < 0) continue;
        auto& s = stats[static_cast<size_t>(nd)];
        s.g += g[static_cast<size_t>(i)];
        s.h += h[static_cast<size_t>(i)];
        s.count += 1;
      }

      std::vector<BestSplit> best(static_cast<size_t>(width));
      std::vector<char> active(static_cast<size_t>(width), 0);
      for (int nd : frontier) active[static_cast<size_t>(nd)] = 1;

      // One pass per feature over the global sorted order; running left-hand
      // sums are kept per node.
      std::vector<double> gl(static_cast<size_t>(width)), hl(static_cast<size_t>(width));
      std::vector<long> cl(static_cast<size_t>(width));
      std::vector<double> prev(static_cast<size_t>(width));
      std::vector<char> seen(static_cast<size_t>(width));
      for (long c = 0; c < p; ++c) {
        std::fill(gl.begin(), gl.end(), 0.0);
        std::fill(hl.begin(), hl.end(), 0.0);
        std::fill(cl.begin(), cl.end(), 0);
        std::fill(seen.begin(), seen.end(), 0);
        for (int r : sorted[static_cast<size_t>(c)]) {
          int nd = node_of[static_cast<size_t>(r)];
          if (nd < 0 || !active[static_cast<size_t>(nd)]) continue;
          double v = X.X(r, c);
          if (seen[static_cast<size_t>(nd)] && v != prev[static_cast<size_t>(nd)] &&
              cl[static_cast<size_t>(nd)] >= params.min_leaf &&
              stats[static_cast<size_t>(nd)].count - cl[static_cast<size_t>(nd)] >=
                  params.min_leaf) {
            const auto& s = stats[static_cast<size_t>(nd)];
            double gr = s.g - gl[static_cast<size_t>(nd)];
            double hr = s.h - hl[static_cast<size_t>(nd)];
            double gain = leaf_gain(gl[static_cast<size_t>(nd)], hl[static_cast<size_t>(nd)]) +
                          leaf_gain(gr, hr) - leaf_gain(s.g, s.h);
            if (gain > best[static_cast<size_t>(nd)].gain + 1e-12) {
              best[static_cast<size_t>(nd)] = {static_cast<int>(c),
                                               0.5 * (prev[static_cast<size_t>(nd)] + v), gain};
            }
          }
          gl[static_cast<size_t>(nd)] += g[static_cast<size_t>(r)];
          hl[static_cast<size_t>(nd)] += h[static_cast<size_t>(r)];
          cl[static_cast<size_t>(nd)] += 1;
          prev[static_cast<size_t>(nd)] = v;
          seen[static_cast<size_t>(nd)] = 1;
        }
      }

      std::vector<int> next_frontier;
      for (int nd : frontier) {
        const BestSplit& b = best[static_cast<size_t>(nd)];
        if (b.feature < 0 || b.gain <= 1e-12) continue;  // stays a leaf
        TreeNode& node = tree.nodes[static_cast<size_t>(nd)];
        node.feature = b.feature;
        node.threshold = b.threshold;
        node.left = static_cast<int>(tree.nodes.size());
        node.right = node.left + 1;
        tree.nodes.push_back(TreeNode{});
        tree.nodes.push_back(TreeNode{});
        next_frontier.push_back(node.left);
        next_frontier.push_back(node.right);
      }
      if (next_frontier.empty()) break;
      for (long i = 0; i < n; ++i) {
        int nd = node_of[static_cast<size_t>(i)];
        if (nd < 0) continue;
        const TreeNode& node = tree.nodes[static_cast<size_t>(nd)];
        if (node.feature >= 0)
          node_of[static_cast<size_t>(i)] =
              X.X(i, node.feature) <= node.threshold ? node.left : node.right;
      }
      frontier = std::move(next_frontier);
    }

    // leaf values: damped Newton step
    {
      const int width = static_cast<int>(tree.nodes.size());
      std::vector<NodeStats> stats(static_cast<size_t>(width));
      for (long i = 0; i < n; ++i) {
        int nd = node_of[static_cast<size_t>(i)];
        auto& s = stats[static_cast<size_t>(nd)];
        s.g += g[static_cast<size_t>(i)];
        s.h += h[static_cast<size_t>(i)];
      }
      for (int nd = 0; nd < width; ++nd) {
        TreeNode& node = tree.nodes[static_cast<size_t>(nd)];
        if (node.feature < 0) {
          node.value = -params.learning_rate * stats[static_cast<size_t>(nd)].g /
                       (stats[static_cast<size_t>(nd)].h + 1e-12);
          if (!std::isfinite(node.value)) throw NumericError("non-finite leaf value");
        }
      }
    }

    for (long i = 0; i < n; ++i)
      f[static_cast<size_t>(i)] += tree.predict_row(X, i);
    fit.trees.push_back(std::move(tree));
    fit.train_loss.push_back(mean_loss(ops, f, off, y, w));

    if (nv > 0) {
      const Tree& t = fit.trees.back();
      for (long i = 0; i < nv; ++i)
        fv[static_cast<size_t>(i)] += t.predict_row(*valid->X, i);
      double vl = mean_loss(ops, fv, offv, yv, wv);
      fit.valid_loss.push_back(vl);
      if (vl < best_valid - 1e-12) {
        best_valid = vl;
        since_best = 0;
      } else {
        ++since_best;
      }
      if (params.early_stop_rounds > 0 && since_best >= params.early_stop_rounds) break;
    }
  }

  if (nv > 0) {
    int best_idx = 0;
    for (size_t r = 1; r < fit.valid_loss.size(); ++r)
      if (fit.valid_loss[r] < fit.valid_loss[static_cast<size_t>(best_idx)])
        best_idx = static_cast<int>(r);
    fit.best_iteration = best_idx;  // index 0 = base score only
  } else {
    fit.best_iteration = static_cast<int>(fit.trees.size());
  }
  return fit;
}

std::vector<double> predict_link(const GbtFit& fit, const DesignMatrix& X) {
  const long n = X.rows();
  std::vector<double> out(static_cast<size_t>(n), fit.base_score);
  const int used = std::min(fit.best_iteration, static_cast<int>(fit.trees.size()));
  for (int t = 0; t < used; ++t)
    for (long i = 0; i < n; ++i)
      out[static_cast<size_t>(i)] += fit.trees[static_cast<size_t>(t)].predict_row(X, i);
  return out;
}

std::vector<double> predict_response(const GbtFit& fit, const DesignMatrix& X) {
  auto out = predict_link(fit, X);
  for (auto& v : out) {
    switch (fit.loss) {
      case GbtLoss::poisson: v = std::exp(v); break;
      case GbtLoss::logistic: v = sigmoid(v); break;
      case GbtLoss::squared: break;
    }
  }
  return out;
}

const char* gbt_loss_name(GbtLoss loss) {
  switch (loss) {
    case GbtLoss::poisson: return "poisson";
    case GbtLoss::logistic: return "logistic";
    case GbtLoss::squared: return "squared";
  }
  return "?";
}

GbtLoss gbt_loss_from_name(const std::string& s) {
  if (s == "poisson") return GbtLoss::poisson;
  if (s == "logistic") return GbtLoss::logistic;
  if (s == "squared") return GbtLoss::squared;
  throw DataError("unknown boosting loss: " + s);
}

}  // namespace survred
