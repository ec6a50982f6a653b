#pragma once

#include <Eigen/Dense>
#include <functional>

namespace dtrbo::math {

struct NelderMeadOptions {
  int max_evals = 400;
  double ftol_abs = 1e-10;   // stop once the simplex's f-spread drops below this
  double xtol_abs = 1e-10;   // ... or its largest edge length does
  double initial_step = 0.1;  // fraction of each box width used to seed the simplex
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double fx = 0.0;
  int evals = 0;
};

// Nelder-Mead on a box: every proposed vertex is clamped into [lo, hi]
// before evaluation, so f is only ever called inside the box.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi, const NelderMeadOptions& opts = {});

}  // namespace dtrbo::math
