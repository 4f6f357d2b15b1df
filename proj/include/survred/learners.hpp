#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "survred/design.hpp"
#include "survred/gbt.hpp"
#include "survred/glm.hpp"

namespace survred {

// Loss family shared between the GLM and GBT learners (canonical links).
enum class Objective { poisson, logistic, squared };

Family family_of(Objective o);
GbtLoss loss_of(Objective o);
const char* objective_name(Objective o);

struct LearnerSpec {
  enum class Kind { glm, gbt };
  Kind kind = Kind::glm;
  double ridge = 0.0;  // glm
  GbtParams gbt;
  // grouped holdout fraction carved by the reductions when early stopping is on
  double valid_fraction = 0.2;
  uint64_t seed = 1;
};

struct LearnerModel {
  LearnerSpec::Kind kind = LearnerSpec::Kind::glm;
  Objective objective = Objective::squared;
  GlmFit glm;
  GbtFit gbt;

  std::vector<double> predict_link(const DesignMatrix& X) const;
  std::vector<double> predict_response(const DesignMatrix& X) const;
};

LearnerModel fit_learner(const LearnerSpec& spec, Objective objective, const DesignMatrix& X,
                         const std::vector<double>& y, const std::vector<double>* offset,
                         const std::vector<double>* weights, const GbtData* valid = nullptr);

}  // namespace survred
