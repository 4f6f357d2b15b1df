#pragma once

#include <vector>

#include "survred/design.hpp"

namespace survred {

enum class Family { poisson_log, binomial_logit, gaussian_identity };

struct GlmFit {
  Family family = Family::gaussian_identity;
  std::vector<double> coef;  // intercept first, then one per design column
  double ridge = 0.0;
  int iterations = 0;
  double deviance = 0.0;                 // final unpenalized deviance
  std::vector<double> deviance_trace;    // penalized deviance per IRLS iteration
};

// Penalized maximum likelihood via iteratively reweighted least squares.
// The ridge penalty excludes the intercept. Converged when the relative
// penalized-deviance change drops below 1e-10 (at most 100 iterations).
GlmFit fit_glm(const DesignMatrix& X, const std::vector<double>& y,
               const std::vector<double>* offset, const std::vector<double>* weights,
               Family family, double ridge);

// Link-scale predictions; the training offset is ignored.
std::vector<double> predict_link(const GlmFit& fit, const DesignMatrix& X);
std::vector<double> predict_response(const GlmFit& fit, const DesignMatrix& X);

double inverse_link(Family family, double eta);
double glm_deviance(Family family, const std::vector<double>& y, const std::vector<double>& mu,
                    const std::vector<double>* weights);

const char* family_name(Family f);
Family family_from_name(const std::string& s);

}  // namespace survred
