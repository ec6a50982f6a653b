#pragma once

namespace dtrbo::math {

// Normal(mu, sigma^2) truncated to [lo, hi].  All functions require sigma > 0
// and lo < hi.  Tail-heavy configurations (all mass outside [lo, hi]) are
// handled in log space, so mu far beyond the bounds stays finite.

// Inverse-CDF draw; u must lie strictly inside (0, 1).  Monotone in u.
double trunc_norm_sample(double mu, double sigma, double lo, double hi, double u);

double trunc_norm_log_pdf(double x, double mu, double sigma, double lo, double hi);

double trunc_norm_cdf(double x, double mu, double sigma, double lo, double hi);

}  // namespace dtrbo::math
