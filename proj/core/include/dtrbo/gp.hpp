#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <json.hpp>
#include <optional>
#include <vector>

namespace dtrbo::gp {

// Matérn-family covariance: nu selects the smoothness (0.5, 1.5, or 2.5),
// lengthscales are per-dimension (ARD), noise_variance is the white-noise
// floor added on the Gram diagonal (never at prediction queries).
struct KernelSpec {
  double nu = 1.5;
  double signal_variance = 1.0;
  Eigen::VectorXd lengthscales;
  double noise_variance = 0.0;

  void validate() const;
  nlohmann::json to_json() const;
  static KernelSpec from_json(const nlohmann::json& j);
};

// Matérn correlation m_nu at ARD-scaled distance r.
double matern_correlation(double nu, double r);

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& a,
                   const Eigen::VectorXd& b);

struct PredictiveDistribution {
  double mean = 0.0;
  double variance = 0.0;
};

struct GpFitConfig {
  // Subtract the target sample mean before fitting and re-add it at
  // prediction. The prior mean stays zero either way.
  bool center_targets = true;
};

// Trained surrogate: immutable after gp_fit, safe to share across threads.
struct GpModel {
  KernelSpec kernel;
  Eigen::MatrixXd train_inputs;     // n x d
  Eigen::VectorXd train_targets;    // raw targets as given
  Eigen::VectorXd per_point_noise;  // size 0 = none; else one variance per pair
  bool centered = true;
  double target_shift = 0.0;         // sample mean removed before the solve
  Eigen::MatrixXd gram_factor;       // lower Cholesky of K + noise + jitter
  Eigen::VectorXd alpha;             // (K + noise)^-1 (targets - shift)
  double jitter_used = 0.0;

  nlohmann::json to_json() const;
  static GpModel from_json(const nlohmann::json& j);
};

GpModel gp_fit(const KernelSpec& kernel, const Eigen::MatrixXd& inputs,
               const Eigen::VectorXd& targets,
               const Eigen::VectorXd& per_point_noise = Eigen::VectorXd(),
               const GpFitConfig& cfg = {});

PredictiveDistribution gp_predict(const GpModel& model, const Eigen::VectorXd& query);

// Gaussian log evidence of the raw targets under the kernel (no centering).
double log_marginal_likelihood(const KernelSpec& kernel, const Eigen::MatrixXd& inputs,
                               const Eigen::VectorXd& targets,
                               const Eigen::VectorXd& per_point_noise = Eigen::VectorXd());

struct TuneConfig {
  double nu = 1.5;               // fixed during the search
  int restarts = 8;              // space-filling multi-start count
  int max_evals_per_restart = 0; // 0 → 40 * (d + 2)
  double ftol_abs = 1e-4;        // simplex stop, log-evidence units
  bool center_targets = true;    // match gp_fit's default preprocessing
  std::uint64_t seed = 0;
  // When set, replaces one space-filling start with this spec (warm start).
  std::optional<KernelSpec> warm_start;
};

// Maximizes log marginal likelihood over log(lengthscales), log(signal
// variance), log(noise variance) within fixed bounds; nu stays at cfg.nu.
// Deterministic given cfg.seed.
KernelSpec tune_hyperparameters(const Eigen::MatrixXd& inputs,
                                const Eigen::VectorXd& targets,
                                const Eigen::VectorXd& per_point_noise = Eigen::VectorXd(),
                                const TuneConfig& cfg = {});

}  // namespace dtrbo::gp
