#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dtrbo/gp.hpp"
#include "dtrbo/policy.hpp"

namespace dtrbo::bayesopt {

struct EvaluationRecord {
  policy::PolicyParams theta;
  double value = 0.0;
  double std_dev = 0.0;
  std::string source;  // "initial-design" or "ei-step"
};

struct OptimizationTrace {
  std::vector<EvaluationRecord> records;
  std::vector<std::string> param_names;
  policy::PolicyParams best_theta;
  double best_value = 0.0;
  int budget_used = 0;

  nlohmann::json to_json() const;
  std::string to_csv() const;  // iteration, θ..., value, std_dev, source

  // Inverse of to_csv; best_theta/best_value are recomputed from the records.
  static OptimizationTrace from_csv(const std::string& csv_text);
};

// Evaluator failure mid-optimization; carries everything evaluated so far.
class EvaluatorFailure : public std::runtime_error {
 public:
  EvaluatorFailure(const std::string& what, OptimizationTrace partial)
      : std::runtime_error(what), partial_trace(std::move(partial)) {}
  OptimizationTrace partial_trace;
};

struct Budget {
  int n_initial = 50;
  int n_ei = 50;
  double ei_stop_threshold = 1e-6;
};

struct GpConfig {
  double nu = 1.5;
  bool center_targets = true;
  int tune_restarts = 8;      // full multi-start tune after the initial design
  int tune_max_evals = 0;     // 0 → tuner default
  // Warm-started retunes after each EI evaluation. The extra fresh starts let
  // a retune escape a likelihood basin the design-stage tune picked (e.g. the
  // noise-dominated optimum) once more evidence favors another one.
  int retune_restarts = 3;
  int retune_max_evals = 50;
};

// Latin-hypercube design over the box.
std::vector<policy::PolicyParams> space_filling_design(const policy::ParamBox& box, int b,
                                                       std::uint64_t seed);

// EI under the minimization convention: the model is trained on negated
// values and f_min is the smallest negated evaluation so far.
double expected_improvement(const gp::GpModel& model, const Eigen::VectorXd& theta,
                            double f_min);

// Candidate sweep (quasi-random points, training-point perturbations and
// midpoints) followed by simplex refinement of the top 5; exact EI ties break
// lexicographically by coordinates.
policy::PolicyParams maximize_ei(const gp::GpModel& model, const policy::ParamBox& box,
                                 double f_min, std::uint64_t seed);

// Returns (value estimate, its standard deviation).
using Evaluator = std::function<std::pair<double, double>(const policy::PolicyParams&)>;

OptimizationTrace optimize_policy(const Evaluator& evaluator, const policy::ParamBox& box,
                                  const Budget& budget, const GpConfig& gp_config,
                                  std::uint64_t seed);

}  // namespace dtrbo::bayesopt
