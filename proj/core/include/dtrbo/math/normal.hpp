#ifndef DTRBO_MATH_NORMAL_HPP
#define DTRBO_MATH_NORMAL_HPP

namespace dtrbo::math {

double norm_pdf(double z);
double norm_cdf(double z);

// log Phi(z), valid on the whole real line. Switches to the Mills-ratio
// asymptotic expansion once erfc would underflow (z < -36).
double norm_log_cdf(double z);

// Inverse standard normal CDF (Wichura's PPND16 rational approximations).
double norm_ppf(double p);

// Inverse CDF given log(p). Handles log-probabilities far below the smallest
// positive double by Newton refinement on norm_log_cdf.
double norm_ppf_logp(double logp);

}  // namespace dtrbo::math

#endif  // DTRBO_MATH_NORMAL_HPP
