#pragma once

#include <vector>

namespace dtrbo::math {

double mean(const std::vector<double>& v);

// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
double sample_sd(const std::vector<double>& v);

// Type-7 (linear-interpolation) quantile of an unsorted sample; p in [0, 1].
double quantile(std::vector<double> v, double p);

// Split-R̂ over per-parameter scalar chains: each chain is halved, then the
// classic between/within ratio is computed over the resulting sequences.
// Returns 1.0 when all sequences are constant.
double split_rhat(const std::vector<std::vector<double>>& chains);

// Effective sample size: per-chain Geyer initial-positive-sequence truncation
// of the autocorrelation sum, totalled across chains. A flat (zero-variance)
// chain contributes 0.
double ess(const std::vector<std::vector<double>>& chains);

}  // namespace dtrbo::math
