#include "dtrbo/math/normal.hpp"

#include <cmath>
#include <limits>

#include "dtrbo/errors.hpp"
#include "dtrbo/rng.hpp"

namespace dtrbo::math {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kSqrt2 = 1.4142135623730950488016887242097;
}  // namespace

double norm_pdf(double z) { return std::exp(-0.5 * z * z - 0.5 * kLog2Pi); }

double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double norm_log_cdf(double z) {
  if (z > -36.0) {
    // erfc keeps full relative precision down to the subnormal range here.
    return std::log(0.5 * std::erfc(-z / kSqrt2));
  }
  // Phi(z) = phi(z)/(-z) * [1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8 - ...]
  const double zi2 = 1.0 / (z * z);
  const double series = -zi2 * (1.0 - zi2 * (3.0 - zi2 * (15.0 - 105.0 * zi2)));
  return -0.5 * z * z - 0.5 * kLog2Pi - std::log(-z) + std::log1p(series);
}

// PPND16 (Wichura 1988, algorithm AS 241).
double norm_ppf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ArgumentError("norm_ppf: p must lie strictly inside (0, 1)");
  }
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) *
                    r +
                4.5921953931549871457e4) *
                   r +
               1.3731693765509461125e4) *
                  r +
              1.9715909503065514427e3) *
                 r +
             1.3314166789178437745e2) *
                r +
            3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) *
                    r +
                2.1213794301586595867e4) *
                   r +
               5.3941960214247511077e3) *
                  r +
              6.8718700749205790830e2) *
                 r +
             4.2313330701600911252e1) *
                r +
            1.0);
  }
  r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) *
                     r +
                 1.27045825245236838258e0) *
                    r +
                3.64784832476320460504e0) *
                   r +
               5.76949722146069140550e0) *
                  r +
              4.63033784615654529590e0) *
                 r +
             1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) *
                     r +
                 1.48103976427480074590e-1) *
                    r +
                6.89767334985100004550e-1) *
                   r +
               1.67638483018380384940e0) *
                  r +
              2.05319162663775882187e0) *
                 r +
             1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) *
                     r +
                 2.65321895265761230930e-2) *
                    r +
                2.96560571828504891230e-1) *
                   r +
               1.78482653991729133580e0) *
                  r +
              5.46378491116411436990e0) *
                 r +
             6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) *
                     r +
                 7.86869131145613259100e-4) *
                    r +
                1.48753612908506148525e-2) *
                   r +
               1.36929880922735805310e-1) *
                  r +
              5.99832206555887937690e-1) *
                 r +
             1.0);
  }
  return (q < 0.0) ? -value : value;
}

double norm_ppf_logp(double logp) {
  if (!(logp < 0.0)) {
    throw ArgumentError("norm_ppf_logp: log probability must be negative");
  }
  if (logp > -36.0) return norm_ppf(std::exp(logp));

  // First guess from the leading term of -log Phi(z) ~ z^2/2 + log(-z) + log(2*pi)/2.
  double t = -logp;
  double z = -std::sqrt(2.0 * t);
  for (int pass = 0; pass < 4; ++pass) {
    z = -std::sqrt(2.0 * (t - std::log(-z) - 0.5 * kLog2Pi));
  }
  // Newton on f(z) = norm_log_cdf(z) - logp; f'(z) = exp(log phi - log Phi).
  for (int iter = 0; iter < 8; ++iter) {
    const double f = norm_log_cdf(z) - logp;
    const double logphi = -0.5 * z * z - 0.5 * kLog2Pi;
    const double deriv = std::exp(logphi - norm_log_cdf(z));
    const double step = f / deriv;
    z -= step;
    if (std::fabs(step) < 1e-12 * (1.0 + std::fabs(z))) break;
  }
  return z;
}

}  // namespace dtrbo::math

namespace dtrbo {

double Rng::normal() { return math::norm_ppf(uniform()); }

}  // namespace dtrbo
