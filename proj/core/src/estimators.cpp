#include "dtrbo/estimators.hpp"

#include <cmath>

#include "dtrbo/errors.hpp"
#include "dtrbo/io/csv.hpp"
#include "dtrbo/math/stats.hpp"

namespace dtrbo::estimators {

policy::Covariates TrajectoryDataset::covariates(const Trajectory& t) const {
  if (static_cast<Eigen::Index>(x_names.size()) != t.x.size()) {
    throw ArgumentError("TrajectoryDataset: covariate labels do not match record width");
  }
  policy::Covariates c;
  c.items.reserve(x_names.size());
  for (std::size_t k = 0; k < x_names.size(); ++k) {
    c.items.emplace_back(x_names[k], t.x[static_cast<Eigen::Index>(k)]);
  }
  return c;
}

TrajectoryDataset read_trajectories(const std::string& path) {
  const io::CsvTable table = io::read_csv(path);
  const int a_col = table.column("a");
  const int y_col = table.column("y");
  const int p_col = table.column("propensity");
  if (a_col < 0 || y_col < 0 || p_col < 0) {
    throw ArgumentError("read_trajectories: header must contain a, y, propensity");
  }
  TrajectoryDataset data;
  for (int c = 0; c < a_col; ++c) data.x_names.push_back(table.header[static_cast<std::size_t>(c)]);
  if (data.x_names.empty()) {
    throw ArgumentError("read_trajectories: no covariate columns before 'a'");
  }
  for (const auto& row : table.rows) {
    Trajectory t;
    t.x.resize(a_col);
    for (int c = 0; c < a_col; ++c) t.x[c] = io::parse_double(row[static_cast<std::size_t>(c)]);
    t.a = static_cast<int>(io::parse_double(row[static_cast<std::size_t>(a_col)]));
    t.y = io::parse_double(row[static_cast<std::size_t>(y_col)]);
    t.propensity = io::parse_double(row[static_cast<std::size_t>(p_col)]);
    if (t.a != 0 && t.a != 1) throw ArgumentError("read_trajectories: action must be 0/1");
    if (!(t.propensity > 0.0 && t.propensity < 1.0)) {
      throw ArgumentError("read_trajectories: propensity must lie strictly inside (0, 1)");
    }
    data.records.push_back(std::move(t));
  }
  return data;
}

void write_trajectories(const std::string& path, const TrajectoryDataset& data) {
  io::CsvTable table;
  table.header = data.x_names;
  table.header.insert(table.header.end(), {"a", "y", "propensity"});
  for (const auto& t : data.records) {
    std::vector<std::string> row;
    row.reserve(table.header.size());
    for (Eigen::Index k = 0; k < t.x.size(); ++k) row.push_back(io::fmt17(t.x[k]));
    row.push_back(std::to_string(t.a));
    row.push_back(io::fmt17(t.y));
    row.push_back(io::fmt17(t.propensity));
    table.rows.push_back(std::move(row));
  }
  io::write_csv(path, table);
}

OutcomeRecipe OutcomeRecipe::additive(int x_dim) {
  OutcomeRecipe r;
  r.terms.push_back({-1, false});
  for (int k = 0; k < x_dim; ++k) r.terms.push_back({k, false});
  r.terms.push_back({-1, true});
  return r;
}

OutcomeRecipe OutcomeRecipe::interacted(int x_dim) {
  OutcomeRecipe r = additive(x_dim);
  for (int k = 0; k < x_dim; ++k) r.terms.push_back({k, true});
  return r;
}

Eigen::VectorXd OutcomeRecipe::features(const Eigen::VectorXd& x, int a) const {
  Eigen::VectorXd f(static_cast<Eigen::Index>(terms.size()));
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const Term& t = terms[j];
    double v = 1.0;
    if (t.x_index >= 0) {
      if (t.x_index >= x.size()) {
        throw ArgumentError("OutcomeRecipe: covariate index out of range");
      }
      v = x[t.x_index];
    }
    if (t.with_action) v *= static_cast<double>(a);
    f[static_cast<Eigen::Index>(j)] = v;
  }
  return f;
}

OutcomeModel OutcomeModel::zero(OutcomeRecipe recipe) {
  OutcomeModel m;
  m.coef = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(recipe.terms.size()));
  m.recipe = std::move(recipe);
  return m;
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::ipw: return "ipw";
    case EstimatorKind::sipw: return "sipw";
    case EstimatorKind::gcomp: return "gcomp";
    case EstimatorKind::aipwe: return "aipwe";
  }
  throw ArgumentError("to_string: unknown estimator");
}

EstimatorKind estimator_from_string(const std::string& name) {
  if (name == "ipw") return EstimatorKind::ipw;
  if (name == "sipw") return EstimatorKind::sipw;
  if (name == "gcomp") return EstimatorKind::gcomp;
  if (name == "aipwe") return EstimatorKind::aipwe;
  throw ArgumentError("estimator_from_string: unknown estimator '" + name + "'");
}

namespace {

void require_nonempty(const TrajectoryDataset& data, const char* who) {
  if (data.records.empty()) throw ArgumentError(std::string(who) + ": empty dataset");
}

ValueEstimate mean_and_se(const std::vector<double>& terms) {
  ValueEstimate est;
  est.value = math::mean(terms);
  est.std_dev = math::sample_sd(terms) / std::sqrt(static_cast<double>(terms.size()));
  return est;
}

}  // namespace

ValueEstimate ipw_value(const TrajectoryDataset& data, const policy::Policy& pol) {
  require_nonempty(data, "ipw_value");
  std::vector<double> terms;
  terms.reserve(data.records.size());
  for (const auto& t : data.records) {
    const bool consistent = pol.decide(data.covariates(t)) == t.a;
    terms.push_back(consistent ? t.y / t.propensity : 0.0);
  }
  return mean_and_se(terms);
}

ValueEstimate sipw_value(const TrajectoryDataset& data, const policy::Policy& pol) {
  require_nonempty(data, "sipw_value");
  const std::size_t n = data.records.size();
  std::vector<double> w(n), wy(n);
  double w_sum = 0.0, wy_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = data.records[i];
    const bool consistent = pol.decide(data.covariates(t)) == t.a;
    w[i] = consistent ? 1.0 / t.propensity : 0.0;
    wy[i] = w[i] * t.y;
    w_sum += w[i];
    wy_sum += wy[i];
  }
  if (w_sum <= 0.0) {
    throw EstimationError("sipw_value: no unit is consistent with the policy");
  }
  ValueEstimate est;
  est.value = wy_sum / w_sum;
  const double w_mean = w_sum / static_cast<double>(n);
  std::vector<double> psi(n);
  for (std::size_t i = 0; i < n; ++i) {
    psi[i] = w[i] * (data.records[i].y - est.value) / w_mean;
  }
  est.std_dev = math::sample_sd(psi) / std::sqrt(static_cast<double>(n));
  return est;
}

OutcomeModel fit_outcome_model(const TrajectoryDataset& data, const OutcomeRecipe& recipe) {
  require_nonempty(data, "fit_outcome_model");
  if (recipe.terms.empty()) throw ArgumentError("fit_outcome_model: empty recipe");
  const auto n = static_cast<Eigen::Index>(data.records.size());
  const auto p = static_cast<Eigen::Index>(recipe.terms.size());
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = data.records[static_cast<std::size_t>(i)];
    X.row(i) = recipe.features(t.x, t.a);
    y[i] = t.y;
  }
  OutcomeModel model;
  model.recipe = recipe;
  Eigen::MatrixXd xtx = X.transpose() * X;
  const Eigen::VectorXd xty = X.transpose() * y;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
            (ldlt.vectorD().array() > 1e-12 * xtx.trace()).all();
  if (ok) {
    model.coef = ldlt.solve(xty);
    ok = model.coef.allFinite();
  }
  if (!ok) {
    xtx.diagonal().array() += 1e-8;
    model.coef = Eigen::LDLT<Eigen::MatrixXd>(xtx).solve(xty);
  }
  return model;
}

ValueEstimate gcomp_value(const TrajectoryDataset& data, const policy::Policy& pol,
                          const OutcomeModel& model) {
  require_nonempty(data, "gcomp_value");
  std::vector<double> terms;
  terms.reserve(data.records.size());
  for (const auto& t : data.records) {
    const int d = pol.decide(data.covariates(t));
    terms.push_back(model.predict(t.x, d));
  }
  return mean_and_se(terms);
}

ValueEstimate aipwe_value(const TrajectoryDataset& data, const policy::Policy& pol,
                          const OutcomeModel& model) {
  require_nonempty(data, "aipwe_value");
  std::vector<double> terms;
  terms.reserve(data.records.size());
  for (const auto& t : data.records) {
    const int d = pol.decide(data.covariates(t));
    const double plug_in = model.predict(t.x, d);
    if (d == t.a) {
      terms.push_back((t.y - model.predict(t.x, t.a)) / t.propensity + plug_in);
    } else {
      terms.push_back(plug_in);
    }
  }
  return mean_and_se(terms);
}

std::vector<double> value_draws(const TrajectoryDataset& data, const policy::Policy& pol,
                                EstimatorKind kind, const OutcomeRecipe& recipe,
                                int n_draws, Rng& rng) {
  require_nonempty(data, "value_draws");
  if (n_draws < 2) throw ArgumentError("value_draws: n_draws must be >= 2");
  const std::size_t n = data.records.size();
  std::vector<double> draws;
  draws.reserve(static_cast<std::size_t>(n_draws));
  TrajectoryDataset resample;
  resample.x_names = data.x_names;
  resample.records.resize(n);
  for (int b = 0; b < n_draws; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      resample.records[i] = data.records[rng.uniform_index(n)];
    }
    ValueEstimate est;
    switch (kind) {
      case EstimatorKind::ipw:
        est = ipw_value(resample, pol);
        break;
      case EstimatorKind::sipw:
        est = sipw_value(resample, pol);
        break;
      case EstimatorKind::gcomp:
        est = gcomp_value(resample, pol, fit_outcome_model(resample, recipe));
        break;
      case EstimatorKind::aipwe:
        est = aipwe_value(resample, pol, fit_outcome_model(resample, recipe));
        break;
    }
    draws.push_back(est.value);
  }
  return draws;
}

}  // namespace dtrbo::estimators
