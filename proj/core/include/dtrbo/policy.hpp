#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dtrbo::policy {

// A point in policy-parameter space Θ; dimension is fixed by its ParamBox.
using PolicyParams = Eigen::VectorXd;

// Named feature bag. Policies read features by declared name, so the same
// machinery serves simulation records (x) and PAD-style records (c0, w0).
struct Covariates {
  std::vector<std::pair<std::string, double>> items;

  double get(const std::string& name) const;
  static Covariates single(double x) { return Covariates{{{"x", x}}}; }
};

// Hyper-rectangular feasible set for θ.
struct ParamBox {
  Eigen::VectorXd lower, upper;
  std::vector<std::string> names;  // one label per dimension (optional)

  ParamBox(Eigen::VectorXd lo, Eigen::VectorXd hi, std::vector<std::string> labels = {});

  Eigen::Index dim() const { return lower.size(); }
  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd clamp(Eigen::VectorXd x) const;
  // Affine image of a unit-cube point.
  Eigen::VectorXd from_unit(const Eigen::VectorXd& u) const;
};

// d(x; β) = 1(x < β1 or x > β2). β1 > β2 degenerates to treat-everyone;
// β1 = β2 spares exactly the point x = β1.
struct ThresholdPolicy {
  double beta1 = 0.0, beta2 = 0.0;
  int decide(const Covariates& c) const;
};

// d(h; θ) = 1(c0 < θ1 or w0 > θ2): revascularize on low baseline compliance
// or large wound size.
struct TwoFeaturePolicy {
  double theta1 = 0.0, theta2 = 0.0;
  int decide(const Covariates& c) const;
};

// Value-semantic wrapper over the policy classes.
class Policy {
 public:
  Policy(ThresholdPolicy p) : impl_(p) {}
  Policy(TwoFeaturePolicy p) : impl_(p) {}

  int decide(const Covariates& c) const;
  bool consistent(const Covariates& c, int observed_action) const {
    return decide(c) == observed_action;
  }

  nlohmann::json to_json() const;
  static Policy from_json(const nlohmann::json& j);

  const ThresholdPolicy* as_threshold() const {
    return std::get_if<ThresholdPolicy>(&impl_);
  }
  const TwoFeaturePolicy* as_two_feature() const {
    return std::get_if<TwoFeaturePolicy>(&impl_);
  }

 private:
  std::variant<ThresholdPolicy, TwoFeaturePolicy> impl_;
};

// Axis-aligned lattice over the closed box, both endpoints included,
// row-major (last dimension fastest).
std::vector<PolicyParams> enumerate_grid(const ParamBox& box,
                                         const std::vector<int>& resolution);

}  // namespace dtrbo::policy
