#include "dtrbo/math/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "dtrbo/errors.hpp"

namespace dtrbo::math {

double mean(const std::vector<double>& v) {
  if (v.empty()) throw ArgumentError("mean: empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw ArgumentError("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("quantile: p must lie in [0, 1]");
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  for (const auto& c : chains) {
    const std::size_t n = c.size();
    if (n < 4) throw ArgumentError("split_rhat: chains must hold at least 4 draws");
    const std::size_t h = n / 2;
    halves.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(h));
    halves.emplace_back(c.end() - static_cast<std::ptrdiff_t>(h), c.end());
  }
  const auto m = static_cast<double>(halves.size());
  const auto n = static_cast<double>(halves.front().size());
  std::vector<double> seq_means, seq_vars;
  for (const auto& s : halves) {
    const double mu = mean(s);
    seq_means.push_back(mu);
    double ss = 0.0;
    for (double x : s) ss += (x - mu) * (x - mu);
    seq_vars.push_back(ss / (n - 1.0));
  }
  const double w = mean(seq_vars);
  const double grand = mean(seq_means);
  double b = 0.0;
  for (double mu : seq_means) b += (mu - grand) * (mu - grand);
  b *= n / (m - 1.0);
  if (w <= 0.0) return 1.0;
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

namespace {

// Geyer's initial positive sequence on one chain: sum autocorrelations in
// adjacent pairs, stopping at the first nonpositive pair sum.
double chain_ess(const std::vector<double>& c) {
  const std::size_t n = c.size();
  if (n < 4) throw ArgumentError("ess: chains must hold at least 4 draws");
  const double mu = mean(c);
  double c0 = 0.0;
  for (double x : c) c0 += (x - mu) * (x - mu);
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) return 0.0;
  auto gamma = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += (c[t] - mu) * (c[t + lag] - mu);
    return s / static_cast<double>(n);
  };
  double tau = 1.0;
  for (std::size_t k = 1; k + 1 < n; k += 2) {
    const double pair = (gamma(k) + gamma(k + 1)) / c0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return static_cast<double>(n) / tau;
}

}  // namespace

double ess(const std::vector<std::vector<double>>& chains) {
  double total = 0.0;
  for (const auto& c : chains) total += chain_ess(c);
  return total;
}

}  // namespace dtrbo::math
