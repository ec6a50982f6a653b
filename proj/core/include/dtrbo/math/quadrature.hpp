#pragma once

#include <functional>

namespace dtrbo::math {

// Adaptive Simpson integration of f on [a, b] to absolute tolerance tol.
// The estimate carries the standard 1/15 Richardson correction.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 40);

}  // namespace dtrbo::math
