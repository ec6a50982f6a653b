#include "dtrbo/math/sequences.hpp"

#include <cmath>

#include "dtrbo/errors.hpp"

namespace dtrbo::math {

namespace {
constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
constexpr int kMaxHaltonDim = static_cast<int>(sizeof(kPrimes) / sizeof(kPrimes[0]));
}  // namespace

double radical_inverse(std::uint64_t index, unsigned base) {
  double inv_base = 1.0 / base;
  double scale = inv_base;
  double result = 0.0;
  while (index > 0) {
    result += static_cast<double>(index % base) * scale;
    index /= base;
    scale *= inv_base;
  }
  return result;
}

std::vector<Eigen::VectorXd> halton_sequence(int dim, int n, std::uint64_t seed) {
  if (dim < 1 || dim > kMaxHaltonDim) {
    throw ArgumentError("halton_sequence: dim must lie in [1, 20]");
  }
  if (n < 0) throw ArgumentError("halton_sequence: n must be nonnegative");
  Rng shift_rng(mix_seed(seed, 0x48616c746fULL));  // "Halto"
  Eigen::VectorXd shift(dim);
  for (int d = 0; d < dim; ++d) shift[d] = shift_rng.uniform();
  std::vector<Eigen::VectorXd> points;
  points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p(dim);
    for (int d = 0; d < dim; ++d) {
      double v = radical_inverse(static_cast<std::uint64_t>(i) + 1, kPrimes[d]) + shift[d];
      v -= std::floor(v);
      p[d] = v;
    }
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<Eigen::VectorXd> latin_hypercube(int dim, int n, Rng& rng) {
  if (dim < 1) throw ArgumentError("latin_hypercube: dim must be >= 1");
  if (n < 1) throw ArgumentError("latin_hypercube: n must be >= 1");
  std::vector<Eigen::VectorXd> points(static_cast<std::size_t>(n), Eigen::VectorXd(dim));
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int d = 0; d < dim; ++d) {
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(
          rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
      std::swap(perm[static_cast<std::size_t>(i)], perm[j]);
    }
    for (int i = 0; i < n; ++i) {
      points[static_cast<std::size_t>(i)][d] =
          (static_cast<double>(perm[static_cast<std::size_t>(i)]) + rng.uniform()) / n;
    }
  }
  return points;
}

}  // namespace dtrbo::math
