#include "dtrbo/math/truncated_normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dtrbo/errors.hpp"
#include "dtrbo/math/normal.hpp"

namespace dtrbo::math {

namespace {

void check_args(double sigma, double lo, double hi) {
  if (!(sigma > 0.0)) throw ArgumentError("truncated normal: sigma must be > 0");
  if (!(lo < hi)) throw ArgumentError("truncated normal: requires lo < hi");
}

// log(Phi(b) - Phi(a)) for a < b, evaluated in the negative tail so that the
// cancellation-prone case (both bounds deep in the same tail) stays accurate.
double log_cdf_diff(double a, double b) {
  if (a + b > 0.0) {
    const double t = -a;
    a = -b;
    b = t;
  }
  const double la = norm_log_cdf(a);
  const double lb = norm_log_cdf(b);
  return lb + std::log1p(-std::exp(la - lb));
}

}  // namespace

double trunc_norm_sample(double mu, double sigma, double lo, double hi, double u) {
  check_args(sigma, lo, hi);
  if (!(u > 0.0 && u < 1.0)) {
    throw ArgumentError("trunc_norm_sample: u must lie strictly inside (0, 1)");
  }
  double a = (lo - mu) / sigma;
  double b = (hi - mu) / sigma;
  bool flipped = false;
  if (a + b > 0.0) {
    // Work where Phi is small: reflect so the interval sits in the lower tail.
    const double t = -a;
    a = -b;
    b = t;
    u = 1.0 - u;
    flipped = true;
  }
  const double la = norm_log_cdf(a);
  const double lb = norm_log_cdf(b);
  // log[(1-u)Phi(a) + u Phi(b)], factored around the larger term Phi(b).
  const double logp = lb + std::log(u + (1.0 - u) * std::exp(la - lb));
  double z = norm_ppf_logp(logp);
  if (flipped) z = -z;
  const double x = mu + sigma * z;
  return std::min(hi, std::max(lo, x));
}

double trunc_norm_log_pdf(double x, double mu, double sigma, double lo, double hi) {
  check_args(sigma, lo, hi);
  if (x < lo || x > hi) return -std::numeric_limits<double>::infinity();
  const double z = (x - mu) / sigma;
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  return -0.5 * z * z - 0.91893853320467274178 - std::log(sigma) - log_cdf_diff(a, b);
}

double trunc_norm_cdf(double x, double mu, double sigma, double lo, double hi) {
  check_args(sigma, lo, hi);
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  const double z = (x - mu) / sigma;
  // Numerator and denominator via the same stable log-difference.
  return std::exp(log_cdf_diff(a, z) - log_cdf_diff(a, b));
}

}  // namespace dtrbo::math
