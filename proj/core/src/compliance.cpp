#include "dtrbo/compliance.hpp"

#include <cmath>
#include <sstream>

#include "dtrbo/errors.hpp"
#include "dtrbo/io/csv.hpp"
#include "dtrbo/math/normal.hpp"
#include "dtrbo/math/stats.hpp"
#include "dtrbo/math/truncated_normal.hpp"
#include "dtrbo/parallel.hpp"

namespace dtrbo::compliance {

namespace {

constexpr std::uint64_t kTagComplianceFit = 0x636d706cULL;  // "cmpl"
constexpr std::uint64_t kTagOutcomeFit = 0x6f757463ULL;     // "outc"
constexpr std::uint64_t kTagImpute = 0x696d7075ULL;         // "impu"
constexpr std::uint64_t kTagValueDraw = 0x76647277ULL;      // "vdrw"

double sigmoid(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

double log_sigmoid(double eta) {
  return eta >= 0.0 ? -std::log1p(std::exp(-eta)) : eta - std::log1p(std::exp(eta));
}

void check_record(const ComplianceDataset& d, const ComplianceTrajectory& t) {
  if (static_cast<Eigen::Index>(d.x0_names.size()) != t.x0.size() ||
      static_cast<Eigen::Index>(d.x1_names.size()) != t.x1.size()) {
    throw ArgumentError("ComplianceDataset: covariate labels do not match record widths");
  }
}

void require_gate(const char* who, const Eigen::VectorXd& rhat, const Eigen::VectorXd& ess) {
  const double max_rhat = rhat.maxCoeff();
  const double min_ess = ess.minCoeff();
  if (max_rhat > 1.05 || min_ess < 100.0) {
    std::ostringstream msg;
    msg << who << ": chains failed convergence: max split-R-hat " << max_rhat
        << " (limit 1.05), min ESS " << min_ess << " (limit 100)";
    throw ConvergenceError(msg.str());
  }
}

// Ridge-stabilized least squares; only used to start chains near the mode.
Eigen::VectorXd ols_init(const Eigen::MatrixXd& F, const Eigen::VectorXd& y) {
  Eigen::MatrixXd G = F.transpose() * F;
  G.diagonal().array() += 1e-8 * (1.0 + G.diagonal().maxCoeff());
  return G.ldlt().solve(F.transpose() * y);
}

// Ridge-penalized logistic MAP via damped Newton; starting point only, so a
// handful of iterations is plenty.
Eigen::VectorXd logit_map_init(const Eigen::MatrixXd& F, const Eigen::VectorXd& y,
                               double prior_scale) {
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(F.cols());
  for (int it = 0; it < 25; ++it) {
    const Eigen::VectorXd eta = F * phi;
    Eigen::VectorXd mu(eta.size()), w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      mu[i] = sigmoid(eta[i]);
      w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-6);
    }
    const Eigen::VectorXd grad = F.transpose() * (y - mu) - phi / prior_scale;
    Eigen::MatrixXd H = F.transpose() * w.asDiagonal() * F;
    H.diagonal().array() += 1.0 / prior_scale;
    const Eigen::VectorXd step = H.ldlt().solve(grad);
    phi += step;
    if (step.lpNorm<Eigen::Infinity>() < 1e-8) break;
  }
  return phi;
}

// Sampling runs in the orthonormal basis of a thin QR of the design (φ = Rβ,
// design Q = F·R⁻¹). The posterior is untouched — coefficients are mapped back
// to the model basis before the prior is evaluated — but raw clinical designs
// carry severe collinearity (intercept vs covariate means, compliance vs its
// treatment interaction) that a diagonal random-walk proposal cannot cross,
// while in the orthonormal basis the posterior is near-isotropic.
struct SamplingBasis {
  Eigen::MatrixXd design;    // n×p with orthonormal columns
  Eigen::MatrixXd to_model;  // p×p: β = to_model · φ
};

SamplingBasis orthonormal_basis(const Eigen::MatrixXd& F, const char* who) {
  const Eigen::Index p = F.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(F);
  const Eigen::MatrixXd R_full = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const double rmax = R_full.diagonal().cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (std::abs(R_full(j, j)) < 1e-10 * rmax) {
      throw ArgumentError(std::string(who) + ": design matrix is rank-deficient");
    }
  }
  SamplingBasis out;
  out.design = qr.householderQ() * Eigen::MatrixXd::Identity(F.rows(), p);
  out.to_model = R_full.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(p, p));
  return out;
}

std::string draws_csv_impl(const Eigen::MatrixXd& beta, const Eigen::VectorXd* sigma) {
  std::string out;
  for (Eigen::Index j = 0; j < beta.cols(); ++j) {
    if (j) out += ",";
    out += "beta" + std::to_string(j);
  }
  if (sigma) out += ",sigma";
  out += "\n";
  for (Eigen::Index i = 0; i < beta.rows(); ++i) {
    for (Eigen::Index j = 0; j < beta.cols(); ++j) {
      if (j) out += ",";
      out += io::fmt17(beta(i, j));
    }
    if (sigma) out += "," + io::fmt17((*sigma)[i]);
    out += "\n";
  }
  return out;
}

nlohmann::json diag_json(const Eigen::VectorXd& rhat, const Eigen::VectorXd& ess,
                         double accept_rate) {
  nlohmann::json j;
  j["rhat"] = std::vector<double>(rhat.data(), rhat.data() + rhat.size());
  j["ess"] = std::vector<double>(ess.data(), ess.data() + ess.size());
  j["accept_rate"] = accept_rate;
  return j;
}

}  // namespace

policy::Covariates ComplianceDataset::h1_covariates(const ComplianceTrajectory& t) const {
  check_record(*this, t);
  policy::Covariates c;
  c.items.reserve(x0_names.size() + x1_names.size() + 1);
  for (std::size_t k = 0; k < x0_names.size(); ++k) {
    c.items.emplace_back(x0_names[k], t.x0[static_cast<Eigen::Index>(k)]);
  }
  c.items.emplace_back("c0", t.c0);
  for (std::size_t k = 0; k < x1_names.size(); ++k) {
    c.items.emplace_back(x1_names[k], t.x1[static_cast<Eigen::Index>(k)]);
  }
  return c;
}

Eigen::VectorXd H1Recipe::features(const ComplianceTrajectory& t) const {
  Eigen::VectorXd f(1 + t.x0.size() + 1 + t.x1.size());
  f[0] = 1.0;
  f.segment(1, t.x0.size()) = t.x0;
  f[1 + t.x0.size()] = t.c0;
  f.tail(t.x1.size()) = t.x1;
  return f;
}

Eigen::Index H1Recipe::size(const ComplianceDataset& d) const {
  return 2 + static_cast<Eigen::Index>(d.x0_names.size() + d.x1_names.size());
}

Eigen::VectorXd OutcomeBayesRecipe::features(const ComplianceTrajectory& t, double c1,
                                             int a1) const {
  const Eigen::Index base = 2 + t.x0.size() + t.x1.size();
  Eigen::VectorXd f(base + (interaction ? 3 : 2));
  f[0] = 1.0;
  f.segment(1, t.x0.size()) = t.x0;
  f[1 + t.x0.size()] = t.c0;
  f.segment(2 + t.x0.size(), t.x1.size()) = t.x1;
  f[base] = c1;
  f[base + 1] = static_cast<double>(a1);
  if (interaction) f[base + 2] = static_cast<double>(a1) * c1;
  return f;
}

Eigen::Index OutcomeBayesRecipe::size(const ComplianceDataset& d) const {
  return 2 + static_cast<Eigen::Index>(d.x0_names.size() + d.x1_names.size()) +
         (interaction ? 3 : 2);
}

ComplianceDataset read_compliance(const std::string& path) {
  const io::CsvTable table = io::read_csv(path);
  const int c0_col = table.column("c0");
  const int a1_col = table.column("a1");
  const int c1_col = table.column("c1");
  const int y_col = table.column("y");
  if (c0_col < 0 || a1_col < 0 || c1_col < 0 || y_col < 0) {
    throw ArgumentError("read_compliance: header must contain c0, a1, c1, y");
  }
  ComplianceDataset data;
  for (int c = 0; c < c0_col; ++c) data.x0_names.push_back(table.header[static_cast<std::size_t>(c)]);
  for (int c = c0_col + 1; c < a1_col; ++c) {
    data.x1_names.push_back(table.header[static_cast<std::size_t>(c)]);
  }
  for (const auto& row : table.rows) {
    ComplianceTrajectory t;
    t.x0.resize(c0_col);
    for (int c = 0; c < c0_col; ++c) t.x0[c] = io::parse_double(row[static_cast<std::size_t>(c)]);
    t.c0 = io::parse_double(row[static_cast<std::size_t>(c0_col)]);
    t.x1.resize(a1_col - c0_col - 1);
    for (int c = c0_col + 1; c < a1_col; ++c) {
      t.x1[c - c0_col - 1] = io::parse_double(row[static_cast<std::size_t>(c)]);
    }
    t.a1 = static_cast<int>(io::parse_double(row[static_cast<std::size_t>(a1_col)]));
    if (t.a1 != 0 && t.a1 != 1) throw ArgumentError("read_compliance: a1 must be 0/1");
    const std::string& c1_field = row[static_cast<std::size_t>(c1_col)];
    if (t.a1 == 0) {
      t.c1 = io::parse_double(c1_field);
    } else {
      // The stratum is unobserved for treated records; realized compliance is 1.
      if (!c1_field.empty()) {
        throw ArgumentError("read_compliance: c1 must be blank when a1 = 1");
      }
      t.c1 = 1.0;
    }
    if (!(t.c0 >= 0.0 && t.c0 <= 1.0 && t.c1 >= 0.0 && t.c1 <= 1.0)) {
      throw ArgumentError("read_compliance: compliance must lie in [0, 1]");
    }
    t.y = io::parse_double(row[static_cast<std::size_t>(y_col)]);
    data.records.push_back(std::move(t));
  }
  return data;
}

void write_compliance(const std::string& path, const ComplianceDataset& data) {
  io::CsvTable table;
  table.header = data.x0_names;
  table.header.push_back("c0");
  table.header.insert(table.header.end(), data.x1_names.begin(), data.x1_names.end());
  table.header.insert(table.header.end(), {"a1", "c1", "y"});
  for (const auto& t : data.records) {
    check_record(data, t);
    std::vector<std::string> row;
    row.reserve(table.header.size());
    for (Eigen::Index k = 0; k < t.x0.size(); ++k) row.push_back(io::fmt17(t.x0[k]));
    row.push_back(io::fmt17(t.c0));
    for (Eigen::Index k = 0; k < t.x1.size(); ++k) row.push_back(io::fmt17(t.x1[k]));
    row.push_back(std::to_string(t.a1));
    row.push_back(t.a1 == 0 ? io::fmt17(t.c1) : std::string());
    row.push_back(io::fmt17(t.y));
    table.rows.push_back(std::move(row));
  }
  io::write_csv(path, table);
}

TruncNormPosterior fit_compliance_model(const ComplianceDataset& data,
                                        const H1Recipe& recipe,
                                        const math::McmcConfig& mcmc, std::uint64_t seed) {
  std::vector<std::size_t> untreated;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    if (data.records[i].a1 == 0) untreated.push_back(i);
  }
  if (untreated.size() < 30) {
    throw ArgumentError("fit_compliance_model: needs >= 30 untreated records");
  }
  const auto n0 = static_cast<Eigen::Index>(untreated.size());
  const Eigen::Index p = recipe.size(data);
  Eigen::MatrixXd H(n0, p);
  Eigen::VectorXd c(n0);
  for (Eigen::Index i = 0; i < n0; ++i) {
    const auto& t = data.records[untreated[static_cast<std::size_t>(i)]];
    check_record(data, t);
    H.row(i) = recipe.features(t);
    c[i] = t.c1;
  }

  const SamplingBasis basis = orthonormal_basis(H, "fit_compliance_model");
  auto log_target = [&](const Eigen::VectorXd& params) {
    const double log_sigma = params[p];
    if (log_sigma < -30.0 || log_sigma > 10.0) {
      return -std::numeric_limits<double>::infinity();
    }
    const double sigma = std::exp(log_sigma);
    const Eigen::VectorXd beta = basis.to_model * params.head(p);
    // β ~ MVN(0, 3I); σ ~ HalfCauchy(5), sampled on the log scale (Jacobian σ).
    double lp = -beta.squaredNorm() / 6.0;
    lp += -std::log1p((sigma / 5.0) * (sigma / 5.0)) + log_sigma;
    const Eigen::VectorXd mu = basis.design * params.head(p);
    for (Eigen::Index i = 0; i < n0; ++i) {
      lp += math::trunc_norm_log_pdf(c[i], mu[i], sigma, 0.0, 1.0);
    }
    return lp;
  };

  // Chains start at a crude mode estimate (least squares + residual SD) with
  // Fisher-diagonal scales, so burn-in refines rather than searches. In the
  // orthonormal basis the coefficient posterior is ~σ·I.
  Eigen::VectorXd init(p + 1);
  init.head(p) = ols_init(basis.design, c);
  const double resid_sd =
      std::sqrt((c - basis.design * init.head(p)).squaredNorm() /
                std::max(1.0, static_cast<double>(n0 - p)));
  const double sigma0 = std::max(resid_sd, 0.02);
  init[p] = std::log(sigma0);
  math::McmcConfig cfg = mcmc;
  cfg.init_scale.resize(p + 1);
  cfg.init_scale.head(p).setConstant(sigma0);
  cfg.init_scale[p] = 1.0 / std::sqrt(2.0 * static_cast<double>(n0));

  const auto run = math::run_adaptive_rwm(log_target, init, cfg, mix_seed(seed, kTagComplianceFit));
  require_gate("fit_compliance_model", run.rhat, run.ess);

  TruncNormPosterior post;
  post.recipe = recipe;
  post.beta_draws = run.draws.leftCols(p) * basis.to_model.transpose();
  post.sigma_draws = run.draws.col(p).array().exp();
  post.rhat = run.rhat;
  post.ess = run.ess;
  post.accept_rate = run.accept_rate;
  return post;
}

double impute_c1(const TruncNormPosterior& post, const ComplianceDataset& data,
                 const ComplianceTrajectory& record, Rng& rng) {
  check_record(data, record);
  if (record.a1 != 1) {
    throw ArgumentError("impute_c1: the stratum is observed when a1 = 0");
  }
  const auto k = static_cast<Eigen::Index>(rng.uniform_index(
      static_cast<std::uint64_t>(post.beta_draws.rows())));
  const double mu = post.recipe.features(record).dot(post.beta_draws.row(k));
  return math::trunc_norm_sample(mu, post.sigma_draws[k], 0.0, 1.0, rng.uniform());
}

double impute_c1(const TruncNormPosterior& post, const ComplianceDataset& data,
                 const ComplianceTrajectory& record, std::uint64_t seed) {
  Rng rng(mix_seed(seed, kTagImpute));
  return impute_c1(post, data, record, rng);
}

std::vector<double> completed_c1(const ComplianceDataset& data,
                                 const TruncNormPosterior& post, std::uint64_t seed) {
  Rng rng(mix_seed(seed, kTagImpute));
  std::vector<double> c1(data.records.size());
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto& t = data.records[i];
    c1[i] = t.a1 == 0 ? t.c1 : impute_c1(post, data, t, rng);
  }
  return c1;
}

LogitPosterior fit_outcome_model_bayes(const ComplianceDataset& data,
                                       const std::vector<double>& c1_completed,
                                       const OutcomeBayesRecipe& recipe, double prior_scale,
                                       const math::McmcConfig& mcmc, std::uint64_t seed) {
  if (c1_completed.size() != data.records.size()) {
    throw ArgumentError("fit_outcome_model_bayes: c1 completion must cover every record");
  }
  if (!(prior_scale > 0.0)) {
    throw ArgumentError("fit_outcome_model_bayes: prior scale must be > 0");
  }
  const auto n = static_cast<Eigen::Index>(data.records.size());
  bool seen_0 = false, seen_1 = false;
  for (const auto& t : data.records) {
    if (t.y == 0.0) seen_0 = true;
    else if (t.y == 1.0) seen_1 = true;
    else throw ArgumentError("fit_outcome_model_bayes: outcomes must be 0/1");
  }
  if (!seen_0 || !seen_1) {
    throw ArgumentError("fit_outcome_model_bayes: both outcome classes must be present");
  }
  const Eigen::Index q = recipe.size(data);
  Eigen::MatrixXd F(n, q);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = data.records[static_cast<std::size_t>(i)];
    check_record(data, t);
    const double c1 = c1_completed[static_cast<std::size_t>(i)];
    if (!(c1 >= 0.0 && c1 <= 1.0)) {
      throw ArgumentError("fit_outcome_model_bayes: completed c1 must lie in [0, 1]");
    }
    F.row(i) = recipe.features(t, c1, t.a1);
    y[i] = t.y;
  }

  const SamplingBasis basis = orthonormal_basis(F, "fit_outcome_model_bayes");
  auto log_target = [&](const Eigen::VectorXd& phi) {
    const Eigen::VectorXd beta = basis.to_model * phi;
    double lp = -beta.squaredNorm() / (2.0 * prior_scale);
    const Eigen::VectorXd eta = basis.design * phi;
    for (Eigen::Index i = 0; i < n; ++i) {
      lp += y[i] == 1.0 ? log_sigmoid(eta[i]) : log_sigmoid(-eta[i]);
    }
    return lp;
  };

  // Start at the ridge-logistic mode with curvature-diagonal scales. The
  // spherical ridge here only shapes the starting point; the exact prior
  // lives in the target above.
  const Eigen::VectorXd init = logit_map_init(basis.design, y, prior_scale);
  math::McmcConfig cfg = mcmc;
  cfg.init_scale.resize(q);
  {
    const Eigen::VectorXd eta = basis.design * init;
    for (Eigen::Index j = 0; j < q; ++j) {
      double info = 1.0 / prior_scale;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = sigmoid(eta[i]);
        info += std::max(mu * (1.0 - mu), 1e-6) * basis.design(i, j) * basis.design(i, j);
      }
      cfg.init_scale[j] = 1.0 / std::sqrt(info);
    }
  }

  const auto run = math::run_adaptive_rwm(log_target, init, cfg,
                                          mix_seed(seed, kTagOutcomeFit));
  require_gate("fit_outcome_model_bayes", run.rhat, run.ess);

  LogitPosterior post;
  post.recipe = recipe;
  post.beta_draws = run.draws * basis.to_model.transpose();
  post.rhat = run.rhat;
  post.ess = run.ess;
  post.accept_rate = run.accept_rate;
  for (Eigen::Index j = 0; j < q; ++j) {
    const auto col = post.beta_draws.col(j);
    std::vector<double> v(col.data(), col.data() + col.size());
    if (math::quantile(v, 0.975) > 20.0 || math::quantile(v, 0.025) < -20.0) {
      post.separation_warning = true;
      break;
    }
  }
  return post;
}

double value_draw(const ComplianceDataset& data, const policy::Policy& pol,
                  const TruncNormPosterior& compliance_post,
                  const LogitPosterior& outcome_post, const SimConfig& sim,
                  std::uint64_t seed) {
  if (data.records.empty()) throw ArgumentError("value_draw: empty dataset");
  if (sim.population_size < 1) throw ArgumentError("value_draw: population_size must be >= 1");
  const std::size_t n = data.records.size();

  // Policy decisions and model features are fixed per record; hoist them out
  // of the M-sized resampling loop.
  std::vector<int> assigned(n);
  const Eigen::Index p = compliance_post.recipe.size(data);
  Eigen::MatrixXd H(static_cast<Eigen::Index>(n), p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = data.records[i];
    assigned[i] = pol.decide(data.h1_covariates(t));
    H.row(static_cast<Eigen::Index>(i)) = compliance_post.recipe.features(t);
  }
  const auto n_cdraws = static_cast<std::uint64_t>(compliance_post.beta_draws.rows());
  const auto n_odraws = static_cast<std::uint64_t>(outcome_post.beta_draws.rows());
  const Eigen::Index q = outcome_post.recipe.size(data);
  const Eigen::Index base = q - (outcome_post.recipe.interaction ? 3 : 2);

  Rng rng(mix_seed(seed, kTagValueDraw));
  double total = 0.0;
  for (int m = 0; m < sim.population_size; ++m) {
    const std::size_t i = rng.uniform_index(n);
    const auto& t = data.records[i];
    const int a = assigned[i];
    // Realized compliance under the assigned action (OSPC): ≡ 1 when treated;
    // the stratum C1(0) otherwise, imputed fresh if the record was treated.
    double c1;
    if (a == 1) {
      c1 = 1.0;
    } else if (t.a1 == 0) {
      c1 = t.c1;
    } else {
      const auto k = static_cast<Eigen::Index>(rng.uniform_index(n_cdraws));
      const double mu =
          H.row(static_cast<Eigen::Index>(i)).dot(compliance_post.beta_draws.row(k));
      c1 = math::trunc_norm_sample(mu, compliance_post.sigma_draws[k], 0.0, 1.0,
                                   rng.uniform());
    }
    const auto j = static_cast<Eigen::Index>(rng.uniform_index(n_odraws));
    const auto gamma = outcome_post.beta_draws.row(j);
    double eta = gamma.head(base).dot(outcome_post.recipe.features(t, 0.0, 0).head(base));
    eta += gamma[base] * c1 + gamma[base + 1] * a;
    if (outcome_post.recipe.interaction) eta += gamma[base + 2] * a * c1;
    total += rng.bernoulli(sigmoid(eta)) ? 1.0 : 0.0;
  }
  return total / static_cast<double>(sim.population_size);
}

ValuePosterior value_posterior(const ComplianceDataset& data, const policy::Policy& pol,
                               const TruncNormPosterior& compliance_post,
                               const LogitPosterior& outcome_post, const SimConfig& sim,
                               std::uint64_t seed) {
  if (sim.n_value_draws < 2) throw ArgumentError("value_posterior: needs B >= 2 draws");
  if (sim.repeats < 1) throw ArgumentError("value_posterior: needs R >= 1 repeats");
  ValuePosterior post;
  post.draws.resize(static_cast<std::size_t>(sim.n_value_draws));
  parallel_for(post.draws.size(), [&](std::size_t b) {
    double sum = 0.0;
    for (int r = 0; r < sim.repeats; ++r) {
      sum += value_draw(data, pol, compliance_post, outcome_post, sim,
                        mix_seed(seed, static_cast<std::uint64_t>(b),
                                 static_cast<std::uint64_t>(r)));
    }
    post.draws[b] = sum / static_cast<double>(sim.repeats);
  });
  post.mean = math::mean(post.draws);
  post.median = math::quantile(post.draws, 0.5);
  post.lower95 = math::quantile(post.draws, 0.025);
  post.upper95 = math::quantile(post.draws, 0.975);
  return post;
}

PadSpec PadSpec::demo() {
  // A mostly-compliant cohort with a fairly high healing rate: short
  // extrapolation from the typical stratum to full compliance, and a modest
  // Bernoulli noise floor, keep N = 1,000 fits informative about regime values.
  PadSpec spec;
  spec.compliance_beta = (Eigen::VectorXd(5) << 0.8, -0.001, 0.03, 0.3, 0.03).finished();
  spec.compliance_sigma = 0.1;
  spec.treatment_beta = (Eigen::VectorXd(5) << -1.0, 0.02, 0.1, -0.8, 0.1).finished();
  spec.outcome_beta =
      (Eigen::VectorXd(8) << 0.8, -0.015, 0.1, 0.3, 0.1, 0.8, 0.4, 0.5).finished();
  return spec;
}

namespace {

struct Patient {
  double w0, z0, c0, z1, c10;
};

void check_pad_spec(const PadSpec& spec) {
  if (spec.compliance_beta.size() != 5 || spec.treatment_beta.size() != 5 ||
      spec.outcome_beta.size() != 8) {
    throw ArgumentError("PadSpec: coefficient vectors must have sizes 5, 5, 8");
  }
  if (!(spec.wound_lo > 0.0 && spec.wound_hi <= 100.0 && spec.wound_lo < spec.wound_hi)) {
    throw ArgumentError("PadSpec: wound-size support must sit inside (0, 100]");
  }
  if (!(spec.compliance_sigma > 0.0)) {
    throw ArgumentError("PadSpec: compliance sigma must be > 0");
  }
}

Patient simulate_patient(const PadSpec& spec, Rng& rng) {
  Patient p;
  p.w0 = rng.uniform(spec.wound_lo, spec.wound_hi);
  p.z0 = rng.normal();
  p.c0 = rng.uniform();
  p.z1 = 0.5 * p.z0 + rng.normal();
  const double mu = spec.compliance_beta[0] + spec.compliance_beta[1] * p.w0 +
                    spec.compliance_beta[2] * p.z0 + spec.compliance_beta[3] * p.c0 +
                    spec.compliance_beta[4] * p.z1;
  p.c10 = math::trunc_norm_sample(mu, spec.compliance_sigma, 0.0, 1.0, rng.uniform());
  return p;
}

double outcome_eta(const PadSpec& spec, const Patient& p, double c1, int a1) {
  const auto& g = spec.outcome_beta;
  return g[0] + g[1] * p.w0 + g[2] * p.z0 + g[3] * p.c0 + g[4] * p.z1 + g[5] * c1 +
         g[6] * a1 + g[7] * a1 * c1;
}

}  // namespace

ComplianceDataset generate_pad_like_data(const PadSpec& spec, int n, std::uint64_t seed) {
  check_pad_spec(spec);
  if (n < 1) throw ArgumentError("generate_pad_like_data: n must be >= 1");
  ComplianceDataset data;
  data.x0_names = {"w0", "z0"};
  data.x1_names = {"z1"};
  Rng rng(seed);
  data.records.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Patient p = simulate_patient(spec, rng);
    const auto& a = spec.treatment_beta;
    const double eta_a =
        a[0] + a[1] * p.w0 + a[2] * p.z0 + a[3] * p.c0 + a[4] * p.z1;
    ComplianceTrajectory t;
    t.x0 = (Eigen::VectorXd(2) << p.w0, p.z0).finished();
    t.c0 = p.c0;
    t.x1 = (Eigen::VectorXd(1) << p.z1).finished();
    t.a1 = rng.bernoulli(sigmoid(eta_a)) ? 1 : 0;
    t.c1 = t.a1 == 1 ? 1.0 : p.c10;
    t.y = rng.bernoulli(sigmoid(outcome_eta(spec, p, t.c1, t.a1))) ? 1.0 : 0.0;
    data.records.push_back(std::move(t));
  }
  return data;
}

double forward_policy_value(const PadSpec& spec, const policy::Policy& pol,
                            std::int64_t n_samples, std::uint64_t seed) {
  check_pad_spec(spec);
  if (n_samples < 1) throw ArgumentError("forward_policy_value: n_samples must be >= 1");
  Rng rng(seed);
  double total = 0.0;
  policy::Covariates cov;
  cov.items = {{"w0", 0.0}, {"z0", 0.0}, {"c0", 0.0}, {"z1", 0.0}};
  for (std::int64_t s = 0; s < n_samples; ++s) {
    const Patient p = simulate_patient(spec, rng);
    cov.items[0].second = p.w0;
    cov.items[1].second = p.z0;
    cov.items[2].second = p.c0;
    cov.items[3].second = p.z1;
    const int a = pol.decide(cov);
    const double c1 = a == 1 ? 1.0 : p.c10;
    // Averaging P(Y=1) instead of Bernoulli draws: same mean, less noise.
    total += sigmoid(outcome_eta(spec, p, c1, a));
  }
  return total / static_cast<double>(n_samples);
}

std::string TruncNormPosterior::draws_csv() const {
  return draws_csv_impl(beta_draws, &sigma_draws);
}

nlohmann::json TruncNormPosterior::diagnostics_json() const {
  return diag_json(rhat, ess, accept_rate);
}

std::string LogitPosterior::draws_csv() const { return draws_csv_impl(beta_draws, nullptr); }

nlohmann::json LogitPosterior::diagnostics_json() const {
  nlohmann::json j = diag_json(rhat, ess, accept_rate);
  j["separation_warning"] = separation_warning;
  return j;
}

nlohmann::json ValuePosterior::to_json() const {
  nlohmann::json j;
  j["draws"] = draws;
  j["mean"] = mean;
  j["median"] = median;
  j["lower95"] = lower95;
  j["upper95"] = upper95;
  return j;
}

}  // namespace dtrbo::compliance
