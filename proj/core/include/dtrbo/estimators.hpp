#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dtrbo/policy.hpp"
#include "dtrbo/rng.hpp"

namespace dtrbo::estimators {

// One observed single-decision record.
struct Trajectory {
  Eigen::VectorXd x;
  int a = 0;                 // action in {0, 1}
  double y = 0.0;
  double propensity = 0.5;   // P(A = a | X = x), strictly inside (0, 1)
};

struct TrajectoryDataset {
  std::vector<std::string> x_names;  // covariate labels, e.g. {"x"}
  std::vector<Trajectory> records;

  policy::Covariates covariates(const Trajectory& t) const;
};

TrajectoryDataset read_trajectories(const std::string& path);
void write_trajectories(const std::string& path, const TrajectoryDataset& data);

struct ValueEstimate {
  double value = 0.0;
  double std_dev = 0.0;  // sampling SD of the estimator (plug-in)
};

// Linear conditional-mean basis over (x, a). Each term is an optional
// covariate factor times an optional action factor; (-1, false) is the
// intercept. The default study recipe is additive — deliberately unable to
// represent action-by-covariate interactions.
struct OutcomeRecipe {
  struct Term {
    int x_index = -1;      // -1 → no covariate factor
    bool with_action = false;
  };
  std::vector<Term> terms;

  static OutcomeRecipe additive(int x_dim);    // {1, x..., a}
  static OutcomeRecipe interacted(int x_dim);  // additive plus {a*x...}

  Eigen::VectorXd features(const Eigen::VectorXd& x, int a) const;
};

struct OutcomeModel {
  OutcomeRecipe recipe;
  Eigen::VectorXd coef;

  double predict(const Eigen::VectorXd& x, int a) const {
    return recipe.features(x, a).dot(coef);
  }
  static OutcomeModel zero(OutcomeRecipe recipe);
};

enum class EstimatorKind { ipw, sipw, gcomp, aipwe };
std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);

ValueEstimate ipw_value(const TrajectoryDataset& data, const policy::Policy& pol);

// Hájek-normalized IPW; the SE comes from the ratio-estimator influence function.
ValueEstimate sipw_value(const TrajectoryDataset& data, const policy::Policy& pol);

// Least squares on the recipe basis; singular designs fall back to a ridge
// solve with penalty 1e-8.
OutcomeModel fit_outcome_model(const TrajectoryDataset& data, const OutcomeRecipe& recipe);

ValueEstimate gcomp_value(const TrajectoryDataset& data, const policy::Policy& pol,
                          const OutcomeModel& model);

ValueEstimate aipwe_value(const TrajectoryDataset& data, const policy::Policy& pol,
                          const OutcomeModel& model);

// Nonparametric bootstrap of the chosen estimator; outcome-model estimators
// refit their model on every resample.
std::vector<double> value_draws(const TrajectoryDataset& data, const policy::Policy& pol,
                                EstimatorKind kind, const OutcomeRecipe& recipe,
                                int n_draws, Rng& rng);

}  // namespace dtrbo::estimators
