#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace dtrbo::math {

struct McmcConfig {
  int n_chains = 4;
  int n_iter = 5000;    // total iterations per chain
  int n_burnin = 2500;  // discarded; proposal adaptation happens only here
  double target_accept = 0.234;
  int adapt_batch = 50;
  double init_jitter = 0.1;  // SD of the overdispersed start, in init_scale units
  // Starting global step multiplier; 0 picks the flat-target optimum 2.38/√d.
  // Posterior widths shrink like 1/√n, so callers fitting n observations
  // should start near 2.38/√(d·n) or burn-in is spent walking the step down.
  double init_lambda = 0.0;
  // Optional per-parameter starting proposal scales (empty = all ones); use to
  // equilibrate parameters whose posteriors live on very different scales.
  Eigen::VectorXd init_scale;
};

struct McmcResult {
  std::vector<Eigen::MatrixXd> chains;  // per chain: kept draws x dim
  Eigen::MatrixXd draws;                // all kept draws stacked (chain-major)
  Eigen::VectorXd rhat;                 // split-R̂ per parameter
  Eigen::VectorXd ess;                  // effective sample size per parameter
  double accept_rate = 0.0;             // post-burn-in, pooled over chains
};

// Random-walk Metropolis with per-parameter proposal scales. During burn-in a
// global step multiplier chases the target acceptance rate (Robbins-Monro, in
// batches) while per-parameter scales track the chain's empirical SDs; both
// freeze at the end of burn-in, keeping the kept draws a fixed-kernel chain.
// Chains use independent substreams of `seed`, so results never depend on
// scheduling. Diagnostics are computed; enforcing gates is the caller's call.
McmcResult run_adaptive_rwm(const std::function<double(const Eigen::VectorXd&)>& log_target,
                            const Eigen::VectorXd& init, const McmcConfig& cfg,
                            std::uint64_t seed);

}  // namespace dtrbo::math
