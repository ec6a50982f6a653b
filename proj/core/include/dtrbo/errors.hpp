#ifndef DTRBO_ERRORS_HPP
#define DTRBO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dtrbo {

// Bad call arguments: dimension mismatches, out-of-range settings, malformed input.
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// Linear-algebra or floating-point failure that survived the built-in safeguards.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A statistically degenerate estimation problem (e.g. no policy-consistent units).
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

// MCMC failed its convergence gate; the message carries the offending diagnostics.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dtrbo

#endif  // DTRBO_ERRORS_HPP
