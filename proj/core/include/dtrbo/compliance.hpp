#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "dtrbo/math/mcmc.hpp"
#include "dtrbo/policy.hpp"
#include "dtrbo/rng.hpp"

namespace dtrbo::compliance {

// One observed record under one-sided partial compliance: a0 ≡ 0 for
// everyone, c1 is the realized compliance (≡ 1 whenever a1 = 1); the
// counterfactual stratum C1(0) is latent for treated records.
struct ComplianceTrajectory {
  Eigen::VectorXd x0;  // baseline covariates (first entry is wound size here)
  double c0 = 0.0;     // baseline compliance in [0, 1]
  Eigen::VectorXd x1;  // interim covariates
  int a1 = 0;
  double c1 = 1.0;
  double y = 0.0;      // binary outcome
};

struct ComplianceDataset {
  std::vector<std::string> x0_names;
  std::vector<std::string> x1_names;
  std::vector<ComplianceTrajectory> records;

  // History H1 = (x0, c0, x1) as named features for policy decisions.
  policy::Covariates h1_covariates(const ComplianceTrajectory& t) const;
};

ComplianceDataset read_compliance(const std::string& path);
// c1 is written blank for treated records (the stratum is unobserved there).
void write_compliance(const std::string& path, const ComplianceDataset& data);

// Linear predictor over H1: {1, x0..., c0, x1...}.
struct H1Recipe {
  Eigen::VectorXd features(const ComplianceTrajectory& t) const;
  Eigen::Index size(const ComplianceDataset& d) const;
};

// Linear predictor over (H1, C1(0), A1): {1, x0..., c0, x1..., c1, a1[, a1*c1]}.
struct OutcomeBayesRecipe {
  bool interaction = true;
  Eigen::VectorXd features(const ComplianceTrajectory& t, double c1, int a1) const;
  Eigen::Index size(const ComplianceDataset& d) const;
};

struct TruncNormPosterior {
  H1Recipe recipe;
  Eigen::MatrixXd beta_draws;   // kept draws x p
  Eigen::VectorXd sigma_draws;  // positive scale per draw
  Eigen::VectorXd rhat, ess;    // per parameter (β..., log σ)
  double accept_rate = 0.0;

  std::string draws_csv() const;
  nlohmann::json diagnostics_json() const;
};

struct LogitPosterior {
  OutcomeBayesRecipe recipe;
  Eigen::MatrixXd beta_draws;
  Eigen::VectorXd rhat, ess;
  double accept_rate = 0.0;
  bool separation_warning = false;  // some 95% interval spans ±20

  std::string draws_csv() const;
  nlohmann::json diagnostics_json() const;
};

// Truncated-normal regression of c1 on H1 over the untreated records
// (priors: β ~ MVN(0, 3I), σ ~ HalfCauchy(5)). Chains that miss R̂ ≤ 1.05 or
// ESS ≥ 100 raise ConvergenceError with the diagnostics in the message.
TruncNormPosterior fit_compliance_model(const ComplianceDataset& data,
                                        const H1Recipe& recipe,
                                        const math::McmcConfig& mcmc, std::uint64_t seed);

// One posterior-predictive draw of C1(0) for a treated record: fresh (β, σ)
// from the posterior, then an inverse-CDF [0,1]-truncated normal.
double impute_c1(const TruncNormPosterior& post, const ComplianceDataset& data,
                 const ComplianceTrajectory& record, std::uint64_t seed);
double impute_c1(const TruncNormPosterior& post, const ComplianceDataset& data,
                 const ComplianceTrajectory& record, Rng& rng);

// One posterior-predictive completion of the c1 column: observed strata kept,
// treated records imputed.
std::vector<double> completed_c1(const ComplianceDataset& data,
                                 const TruncNormPosterior& post, std::uint64_t seed);

// Bernoulli-logit regression of y on the recipe features over completed data;
// prior β ~ MVN(0, prior_scale · I).
LogitPosterior fit_outcome_model_bayes(const ComplianceDataset& data,
                                       const std::vector<double>& c1_completed,
                                       const OutcomeBayesRecipe& recipe, double prior_scale,
                                       const math::McmcConfig& mcmc, std::uint64_t seed);

struct SimConfig {
  int population_size = 10000;  // M resamples per value draw
  int repeats = 30;             // R value draws averaged into one outer draw
  int n_value_draws = 100;      // B outer draws
};

// One counterfactual-population draw: resample M records, impute missing
// strata, assign actions by the policy (realized compliance 1 for assigned
// treatment), draw outcomes from the posterior predictive; returns the mean.
double value_draw(const ComplianceDataset& data, const policy::Policy& pol,
                  const TruncNormPosterior& compliance_post,
                  const LogitPosterior& outcome_post, const SimConfig& sim,
                  std::uint64_t seed);

struct ValuePosterior {
  std::vector<double> draws;
  double mean = 0.0, median = 0.0, lower95 = 0.0, upper95 = 0.0;

  nlohmann::json to_json() const;
};

ValuePosterior value_posterior(const ComplianceDataset& data, const policy::Policy& pol,
                               const TruncNormPosterior& compliance_post,
                               const LogitPosterior& outcome_post, const SimConfig& sim,
                               std::uint64_t seed);

// Synthetic stand-in for the clinical cohort: forward-simulates baseline
// covariates (wound size first), compliance strata, logistic treatment
// uptake, and a logistic outcome in (H1, realized C1, A1). Principal
// ignorability holds by construction: C1(0) and A1 are independent given H1,
// and the outcome depends on compliance only through realized C1.
struct PadSpec {
  double wound_lo = 5.0, wound_hi = 95.0;  // uniform wound-size support
  Eigen::VectorXd compliance_beta;         // over {1, w0, z0, c0, z1}
  double compliance_sigma = 0.15;
  Eigen::VectorXd treatment_beta;          // over {1, w0, z0, c0, z1}
  Eigen::VectorXd outcome_beta;            // over {1, w0, z0, c0, z1, c1, a1, a1*c1}
  static PadSpec demo();                   // moderate effects, all pathways active
};

ComplianceDataset generate_pad_like_data(const PadSpec& spec, int n, std::uint64_t seed);

// Monte-Carlo truth for V(d) under the generator: fresh patients, policy
// actions, outcome probabilities averaged (no Bernoulli noise on y).
double forward_policy_value(const PadSpec& spec, const policy::Policy& pol,
                            std::int64_t n_samples, std::uint64_t seed);

}  // namespace dtrbo::compliance
