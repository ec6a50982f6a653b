#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dtrbo/rng.hpp"

namespace dtrbo::math {

// Radical-inverse (van der Corput) digit reversal of index in the given base.
double radical_inverse(std::uint64_t index, unsigned base);

// Halton points in (0,1)^dim with a seeded Cranley-Patterson rotation per
// dimension; identical seed reproduces the identical point set.
std::vector<Eigen::VectorXd> halton_sequence(int dim, int n, std::uint64_t seed);

// Latin hypercube on (0,1)^dim: each dimension's n strata hold exactly one point.
std::vector<Eigen::VectorXd> latin_hypercube(int dim, int n, Rng& rng);

}  // namespace dtrbo::math
