#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "dtrbo/bayesopt.hpp"
#include "dtrbo/estimators.hpp"
#include "dtrbo/policy.hpp"

namespace dtrbo::simbench {

// Single-decision synthetic study: X = wU with U uniform on (0,1), A fair coin,
// Y = γ0 + γ1 x + a·τ(x) with no noise term. τ depends on the setting:
//   1: the indicator 𝟙(x<0.75 or x>0.25), identically 1 on (0,1) as written;
//      `setting1_corrected` swaps in 𝟙(x<0.25 or x>0.75).
//   2: cos(2πx)      3: cos(4πx)
struct DgpSpec {
  int setting = 1;
  double w = 1.0;
  double gamma0 = 0.0;
  double gamma1 = 1.0;
  int n = 200;
  bool setting1_corrected = false;

  void validate() const;
  nlohmann::json to_json() const;
  static DgpSpec from_json(const nlohmann::json& j);
};

// The additive treatment-effect term τ_setting(x).
double treatment_effect(const DgpSpec& spec, double x);

estimators::TrajectoryDataset generate_dataset(const DgpSpec& spec, std::uint64_t seed);

enum class OracleMethod { closed_form, quadrature };

struct OracleValue {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double value = 0.0;
  OracleMethod method = OracleMethod::closed_form;
};

// V(β1, β2) = γ0 + γ1 w/2 + (1/w) ∫_T τ(x) dx with treated region
// T = {x ∈ (0,w): x < β1 or x > β2}. The two routes (antiderivatives vs
// adaptive quadrature) agree to 1e-8.
OracleValue oracle_value(const DgpSpec& spec, const policy::ThresholdPolicy& pol,
                         OracleMethod method = OracleMethod::closed_form);

struct TrueOptimum {
  Eigen::Vector2d theta;
  double value = 0.0;
};

// Oracle maximum over a 400×400 grid on [0,1]²; memoized per spec (sample size
// does not enter the oracle).
TrueOptimum true_optimum(const DgpSpec& spec);

struct StudyConfig {
  DgpSpec dgp;
  estimators::EstimatorKind kind = estimators::EstimatorKind::ipw;
  // Conditional-mean basis for gcomp/aipwe; empty terms → additive default.
  estimators::OutcomeRecipe recipe;
  int runs = 200;
  bayesopt::Budget budget;
  bayesopt::GpConfig gp;
  int n_threads = 0;  // 0 → hardware default
};

struct RunRecord {
  Eigen::Vector2d best_theta;
  double best_estimate = 0.0;   // the estimator's value at the chosen θ
  double oracle_at_best = 0.0;  // true value of the chosen θ
  double sq_error = 0.0;        // (oracle_at_best − true optimum)²
};

struct RunSummary {
  DgpSpec dgp;
  std::string estimator;
  double mse = 0.0;
  double mc_error = 0.0;  // SD of squared errors / √runs
  int runs_completed = 0;
  int runs_excluded = 0;
  double true_value = 0.0;
  Eigen::Vector2d true_theta;
  std::vector<RunRecord> run_records;

  nlohmann::json to_json() const;
};

// One study cell: `runs` independent datasets, each optimized over [0,1]² with
// the chosen estimator as the evaluator. Runs are a parallel map with
// per-run substreams; failed runs are excluded and counted.
RunSummary run_study_cell(const StudyConfig& cfg, std::uint64_t seed);

// A batch of cells; cell i uses substream mix_seed(seed, i).
std::vector<RunSummary> run_simulation_study(const std::vector<StudyConfig>& cells,
                                             std::uint64_t seed);

}  // namespace dtrbo::simbench
