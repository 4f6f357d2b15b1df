#include "survred/glm.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "survred/error.hpp"

namespace survred {

namespace {

constexpr double kDevianceTol = 1e-10;
constexpr int kMaxIter = 100;

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double xlogx_ratio(double y, double mu) {  // y * log(y / mu), 0 at y = 0
  if (y <= 0) return 0.0;
  return y * std::log(y / mu);
}

void check_inputs(const DesignMatrix& X, const std::vector<double>& y,
                  const std::vector<double>* offset, const std::vector<double>* weights,
                  Family family, double ridge) {
  const size_t n = static_cast<size_t>(X.rows());
  if (y.size() != n) throw DataError("response length does not match design rows");
  if (offset && offset->size() != n) throw DataError("offset length mismatch");
  if (weights && weights->size() != n) throw DataError("weights length mismatch");
  if (ridge < 0) throw ConfigError("ridge penalty must be non-negative");
  double wsum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double w = weights ? (*weights)[i] : 1.0;
    if (!(w >= 0)) throw DataError("weights must be non-negative");
    wsum += w;
    if (offset && !std::isfinite((*offset)[i])) throw DataError("offset must be finite");
    if (!std::isfinite(y[i])) throw DataError("response must be finite");
    if (w == 0.0) continue;
    if (family == Family::poisson_log && y[i] < 0)
      throw DataError("poisson response must be non-negative");
    if (family == Family::binomial_logit && (y[i] < 0 || y[i] > 1))
      throw DataError("binomial response must lie in [0, 1]");
  }
  if (wsum <= 0) throw DataError("all observation weights are zero");
}

}  // namespace

double inverse_link(Family family, double eta) {
  switch (family) {
    case Family::poisson_log: return std::exp(eta);
    case Family::binomial_logit: return sigmoid(eta);
    case Family::gaussian_identity: return eta;
  }
  return eta;
}

double glm_deviance(Family family, const std::vector<double>& y, const std::vector<double>& mu,
                    const std::vector<double>* weights) {
  double dev = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    double w = weights ? (*weights)[i] : 1.0;
    if (w == 0.0) continue;
    switch (family) {
      case Family::poisson_log:
        dev += 2.0 * w * (xlogx_ratio(y[i], mu[i]) - (y[i] - mu[i]));
        break;
      case Family::binomial_logit:
        dev += 2.0 * w * (xlogx_ratio(y[i], mu[i]) + xlogx_ratio(1.0 - y[i], 1.0 - mu[i]));
        break;
      case Family::gaussian_identity: {
        double r = y[i] - mu[i];
        dev += w * r * r;
        break;
      }
    }
  }
  return dev;
}

GlmFit fit_glm(const DesignMatrix& X, const std::vector<double>& y,
               const std::vector<double>* offset, const std::vector<double>* weights,
               Family family, double ridge) {
  check_inputs(X, y, offset, weights, family, ridge);
  const long n = X.rows();
  const long p = X.cols();

  Eigen::VectorXd w(n), off(n), yy(n);
  for (long i = 0; i < n; ++i) {
    w(i) = weights ? (*weights)[static_cast<size_t>(i)] : 1.0;
    off(i) = offset ? (*offset)[static_cast<size_t>(i)] : 0.0;
    yy(i) = y[static_cast<size_t>(i)];
  }

  // intercept-augmented design
  Eigen::MatrixXd Xa(n, p + 1);
  Xa.col(0).setOnes();
  if (p > 0) Xa.rightCols(p) = X.X;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  {
    // start from the weighted-mean intercept
    double sw = w.sum();
    switch (family) {
      case Family::poisson_log: {
        double num = (w.array() * yy.array()).sum();
        double den = (w.array() * off.array().exp()).sum();
        beta(0) = std::log(std::max(num, 1e-8) / std::max(den, 1e-300));
        break;
      }
      case Family::binomial_logit: {
        double m = (w.array() * yy.array()).sum() / sw;
        m = std::min(std::max(m, 1e-8), 1.0 - 1e-8);
        beta(0) = std::log(m / (1.0 - m));
        break;
      }
      case Family::gaussian_identity:
        beta(0) = (w.array() * yy.array()).sum() / sw;
        break;
    }
  }

  auto mu_of = [&](const Eigen::VectorXd& b, Eigen::VectorXd& eta, Eigen::VectorXd& mu) {
    eta = Xa * b;
    Eigen::VectorXd lp = eta + off;
    mu.resize(n);
    for (long i = 0; i < n; ++i) mu(i) = inverse_link(family, lp(i));
  };
  auto penalized_deviance = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& mu) {
    std::vector<double> muv(mu.data(), mu.data() + n);
    double dev = glm_deviance(family, y, muv, weights);
    if (ridge > 0 && p > 0) dev += ridge * b.tail(p).squaredNorm();
    return dev;
  };

  Eigen::VectorXd eta, mu;
  mu_of(beta, eta, mu);
  double dev = penalized_deviance(beta, mu);

  GlmFit fit;
  fit.family = family;
  fit.ridge = ridge;
  fit.deviance_trace.push_back(dev);

  bool converged = false;
  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    // working weights and response of the family
    Eigen::VectorXd ww(n), z(n);
    for (long i = 0; i < n; ++i) {
      double var = 1.0;
      switch (family) {
        case Family::poisson_log: var = std::max(mu(i), 1e-300); break;
        case Family::binomial_logit: var = std::max(mu(i) * (1.0 - mu(i)), 1e-300); break;
        case Family::gaussian_identity: var = 1.0; break;
      }
      ww(i) = w(i) * var;
      z(i) = eta(i) + (yy(i) - mu(i)) / var;
      if (!std::isfinite(ww(i)) || !std::isfinite(z(i)))
        throw NumericError("non-finite working quantities in IRLS (possible separation)");
    }

    Eigen::MatrixXd A = Xa.transpose() * ww.asDiagonal() * Xa;
    if (ridge > 0)
      for (long k = 1; k <= p; ++k) A(k, k) += ridge;
    Eigen::VectorXd rhs = Xa.transpose() * (ww.asDiagonal() * z);

    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    Eigen::VectorXd beta_new = ldlt.solve(rhs);
    bool bad = !beta_new.allFinite();
    if (!bad && iter == 0) {
      // structural rank check with healthy starting weights; later iterations
      // may drive working weights of separated cells towards zero, which is
      // not a data defect
      Eigen::VectorXd d = ldlt.vectorD();
      double dmax = d.cwiseAbs().maxCoeff();
      double dmin = d.cwiseAbs().minCoeff();
      if (!(dmax > 0) || dmin < 1e-13 * dmax) bad = true;
    }
    if (bad) {
      if (ridge == 0)
        throw NumericError("singular IRLS system; consider a ridge penalty > 0");
      throw NumericError("IRLS system could not be solved");
    }

    // step-halving keeps the recorded penalized deviance non-increasing
    Eigen::VectorXd eta_new, mu_new;
    mu_of(beta_new, eta_new, mu_new);
    double dev_new = penalized_deviance(beta_new, mu_new);
    int halvings = 0;
    while ((!std::isfinite(dev_new) || dev_new > dev + 1e-12) && halvings < 30) {
      beta_new = 0.5 * (beta_new + beta);
      mu_of(beta_new, eta_new, mu_new);
      dev_new = penalized_deviance(beta_new, mu_new);
      ++halvings;
    }
    if (!std::isfinite(dev_new) || dev_new > dev + 1e-12) {
      // no descent in the Newton direction: numerical optimum reached
      converged = true;
      ++iter;
      break;
    }

    double change = dev - dev_new;
    beta = beta_new;
    eta = eta_new;
    mu = mu_new;
    dev = dev_new;
    fit.deviance_trace.push_back(dev);
    if (std::abs(change) < kDevianceTol * (std::abs(dev) + 0.1)) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged) {
    std::vector<double> muv(mu.data(), mu.data() + n);
    throw NumericError("IRLS did not converge in " + std::to_string(kMaxIter) +
                       " iterations (possible separation); final deviance " +
                       format_number(glm_deviance(family, y, muv, weights)));
  }
  if (!beta.allFinite()) throw NumericError("non-finite coefficients after IRLS");

  fit.iterations = iter;
  fit.coef.assign(beta.data(), beta.data() + p + 1);
  {
    std::vector<double> muv(mu.data(), mu.data() + n);
    fit.deviance = glm_deviance(family, y, muv, weights);
  }
  return fit;
}

std::vector<double> predict_link(const GlmFit& fit, const DesignMatrix& X) {
  const long n = X.rows();
  const long p = X.cols();
  if (static_cast<size_t>(p) + 1 != fit.coef.size())
    throw DataError("design width does not match fitted coefficients");
  std::vector<double> out(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) {
    double eta = fit.coef[0];
    for (long k = 0; k < p; ++k) eta += fit.coef[static_cast<size_t>(k) + 1] * X.X(i, k);
    out[static_cast<size_t>(i)] = eta;
  }
  return out;
}

std::vector<double> predict_response(const GlmFit& fit, const DesignMatrix& X) {
  auto out = predict_link(fit, X);
  for (auto& v : out) v = inverse_link(fit.family, v);
  return out;
}

const char* family_name(Family f) {
  switch (f) {
    case Family::poisson_log: return "poisson-log";
    case Family::binomial_logit: return "binomial-logit";
    case Family::gaussian_identity: return "gaussian-identity";
  }
  return "?";
}

Family family_from_name(const std::string& s) {
  if (s == "poisson-log") return Family::poisson_log;
  if (s == "binomial-logit") return Family::binomial_logit;
  if (s == "gaussian-identity") return Family::gaussian_identity;
  throw DataError("unknown GLM family: " + s);
}

}  // namespace survred
