#include "dtrbo/policy.hpp"

#include <algorithm>

#include "dtrbo/errors.hpp"

namespace dtrbo::policy {

double Covariates::get(const std::string& name) const {
  for (const auto& [key, value] : items) {
    if (key == name) return value;
  }
  throw ArgumentError("Covariates: missing feature '" + name + "'");
}

ParamBox::ParamBox(Eigen::VectorXd lo, Eigen::VectorXd hi, std::vector<std::string> labels)
    : lower(std::move(lo)), upper(std::move(hi)), names(std::move(labels)) {
  if (lower.size() != upper.size() || lower.size() < 1) {
    throw ArgumentError("ParamBox: bound dimensions must match and be >= 1");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) throw ArgumentError("ParamBox: requires lower < upper");
  }
  if (!names.empty() && static_cast<Eigen::Index>(names.size()) != lower.size()) {
    throw ArgumentError("ParamBox: one name per dimension");
  }
}

bool ParamBox::contains(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) return false;
  for (Eigen::Index i = 0; i < dim(); ++i) {
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  }
  return true;
}

Eigen::VectorXd ParamBox::clamp(Eigen::VectorXd x) const {
  if (x.size() != dim()) throw ArgumentError("ParamBox::clamp: dimension mismatch");
  for (Eigen::Index i = 0; i < dim(); ++i) {
    x[i] = std::min(upper[i], std::max(lower[i], x[i]));
  }
  return x;
}

Eigen::VectorXd ParamBox::from_unit(const Eigen::VectorXd& u) const {
  if (u.size() != dim()) throw ArgumentError("ParamBox::from_unit: dimension mismatch");
  return lower.array() + u.array() * (upper - lower).array();
}

int ThresholdPolicy::decide(const Covariates& c) const {
  const double x = c.get("x");
  return (x < beta1 || x > beta2) ? 1 : 0;
}

int TwoFeaturePolicy::decide(const Covariates& c) const {
  const double c0 = c.get("c0");
  const double w0 = c.get("w0");
  return (c0 < theta1 || w0 > theta2) ? 1 : 0;
}

int Policy::decide(const Covariates& c) const {
  return std::visit([&](const auto& p) { return p.decide(c); }, impl_);
}

nlohmann::json Policy::to_json() const {
  nlohmann::json j;
  if (const auto* t = as_threshold()) {
    j["class"] = "threshold";
    j["beta1"] = t->beta1;
    j["beta2"] = t->beta2;
  } else {
    const auto* f = as_two_feature();
    j["class"] = "two-feature";
    j["theta1"] = f->theta1;
    j["theta2"] = f->theta2;
  }
  return j;
}

Policy Policy::from_json(const nlohmann::json& j) {
  const std::string cls = j.at("class").get<std::string>();
  if (cls == "threshold") {
    return Policy(ThresholdPolicy{j.at("beta1").get<double>(), j.at("beta2").get<double>()});
  }
  if (cls == "two-feature") {
    return Policy(
        TwoFeaturePolicy{j.at("theta1").get<double>(), j.at("theta2").get<double>()});
  }
  throw ArgumentError("Policy::from_json: unknown class '" + cls + "'");
}

std::vector<PolicyParams> enumerate_grid(const ParamBox& box,
                                         const std::vector<int>& resolution) {
  if (static_cast<Eigen::Index>(resolution.size()) != box.dim()) {
    throw ArgumentError("enumerate_grid: one resolution per dimension");
  }
  std::size_t total = 1;
  for (int r : resolution) {
    if (r < 2) throw ArgumentError("enumerate_grid: resolution must be >= 2");
    total *= static_cast<std::size_t>(r);
  }
  const Eigen::Index d = box.dim();
  std::vector<PolicyParams> grid;
  grid.reserve(total);
  std::vector<int> idx(resolution.size(), 0);
  Eigen::VectorXd point(d);
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const double t = static_cast<double>(idx[static_cast<std::size_t>(k)]) /
                       static_cast<double>(resolution[static_cast<std::size_t>(k)] - 1);
      point[k] = box.lower[k] + t * (box.upper[k] - box.lower[k]);
    }
    grid.push_back(point);
    // Row-major increment: last dimension spins fastest.
    for (Eigen::Index k = d - 1; k >= 0; --k) {
      auto& i = idx[static_cast<std::size_t>(k)];
      if (++i < resolution[static_cast<std::size_t>(k)]) break;
      i = 0;
    }
  }
  return grid;
}

}  // namespace dtrbo::policy
