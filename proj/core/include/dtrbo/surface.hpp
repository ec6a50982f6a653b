#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

#include "dtrbo/bayesopt.hpp"
#include "dtrbo/policy.hpp"

namespace dtrbo::surface {

// Surrogate of the value function over the whole policy class, evaluated on a
// regular grid. Levels are 5%-wide value bins anchored at 0 (bin = ⌊mean/0.05⌋),
// grouping near-equivalent policies.
struct SurfaceGrid {
  Eigen::VectorXd lower, upper;
  std::vector<int> resolution;  // per dimension
  std::vector<std::string> param_names;
  std::vector<Eigen::VectorXd> points;  // enumerate_grid order (last dim fastest)
  std::vector<double> surrogate_mean;
  std::vector<double> truth;  // empty when no reference attached
  std::vector<int> level;
  double l1 = 0.0, l2 = 0.0;  // mean-absolute / root-mean-square gap vs truth
  bool has_truth = false;
};

struct CharacterizeConfig {
  int resolution = 100;  // per dimension
  double nu = 1.5;       // fresh Matérn + white-noise surrogate
  int tune_restarts = 8;
  int tune_max_evals = 0;  // 0 → tuner default
  bool center_targets = true;
  std::uint64_t seed = 0;
};

// Fits a fresh GP to the (θ, value) records — independent of the optimizer's
// internal negated-value model — and evaluates its predictive mean over the
// grid. When `truth` is supplied, fills the truth column and the fidelity
// norms. Needs ≥ 10 records.
SurfaceGrid characterize_policy_class(
    const std::vector<bayesopt::EvaluationRecord>& records, const policy::ParamBox& box,
    const CharacterizeConfig& cfg,
    const std::function<double(const Eigen::VectorXd&)>& truth = nullptr);

// CSV columns theta1..thetaD, surrogate_mean, truth (when present), level;
// norms and grid shape go to a JSON sidecar. 17-significant-digit decimal
// serialization, byte-stable across repeated exports.
void export_grid(const SurfaceGrid& grid, const std::string& csv_path,
                 const std::string& json_path);

struct ContourStyle {
  int plot_px = 500;
  int margin_px = 40;
};

// Level-set heatmap: one rect per grid cell colored by level bin, overlaid
// evaluation points sized by estimate precision, and a star at `best_theta`.
// 2-D grids only.
std::string render_contour_svg(const SurfaceGrid& grid,
                               const std::vector<bayesopt::EvaluationRecord>& points = {},
                               const Eigen::VectorXd* best_theta = nullptr,
                               const ContourStyle& style = {});

}  // namespace dtrbo::surface
