#include "survred/learners.hpp"

#include "survred/error.hpp"

namespace survred {

Family family_of(Objective o) {
  switch (o) {
    case Objective::poisson: return Family::poisson_log;
    case Objective::logistic: return Family::binomial_logit;
    case Objective::squared: return Family::gaussian_identity;
  }
  return Family::gaussian_identity;
}

GbtLoss loss_of(Objective o) {
  switch (o) {
    case Objective::poisson: return GbtLoss::poisson;
    case Objective::logistic: return GbtLoss::logistic;
    case Objective::squared: return GbtLoss::squared;
  }
  return GbtLoss::squared;
}

const char* objective_name(Objective o) {
  switch (o) {
    case Objective::poisson: return "poisson";
    case Objective::logistic: return "logistic";
    case Objective::squared: return "squared";
  }
  return "?";
}

std::vector<double> LearnerModel::predict_link(const DesignMatrix& X) const {
  return kind == LearnerSpec::Kind::glm ? survred::predict_link(glm, X)
                                        : survred::predict_link(gbt, X);
}

std::vector<double> LearnerModel::predict_response(const DesignMatrix& X) const {
  return kind == LearnerSpec::Kind::glm ? survred::predict_response(glm, X)
                                        : survred::predict_response(gbt, X);
}

LearnerModel fit_learner(const LearnerSpec& spec, Objective objective, const DesignMatrix& X,
                         const std::vector<double>& y, const std::vector<double>* offset,
                         const std::vector<double>* weights, const GbtData* valid) {
  LearnerModel model;
  model.kind = spec.kind;
  model.objective = objective;
  if (spec.kind == LearnerSpec::Kind::glm) {
    model.glm = fit_glm(X, y, offset, weights, family_of(objective), spec.ridge);
  } else {
    model.gbt = fit_gbt(X, y, offset, weights, loss_of(objective), spec.gbt, valid);
  }
  return model;
}

}  // namespace survred
