#include "dtrbo/gp.hpp"

#include <cmath>
#include <limits>

#include "dtrbo/errors.hpp"
#include "dtrbo/math/nelder_mead.hpp"
#include "dtrbo/math/sequences.hpp"
#include "dtrbo/rng.hpp"

namespace dtrbo::gp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kSqrt3 = 1.7320508075688772935274463415059;
constexpr double kSqrt5 = 2.2360679774997896964091736687747;
constexpr double kVarianceClamp = -1e-10;

bool valid_nu(double nu) { return nu == 0.5 || nu == 1.5 || nu == 2.5; }

// Matérn correlation applied elementwise to a matrix of squared scaled distances.
void matern_from_r2(double nu, Eigen::MatrixXd& r2) {
  if (nu == 0.5) {
    r2 = (-r2.array().sqrt()).exp();
  } else if (nu == 1.5) {
    Eigen::ArrayXXd t = (3.0 * r2.array()).sqrt();
    r2 = (1.0 + t) * (-t).exp();
  } else {
    Eigen::ArrayXXd t = (5.0 * r2.array()).sqrt();
    r2 = (1.0 + t + (5.0 / 3.0) * r2.array()) * (-t).exp();
  }
}

struct FactorResult {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  bool ok = false;
};

// K must arrive as signal Gram + noise diagonal; the ladder only adds jitter.
FactorResult factor_with_jitter(Eigen::MatrixXd K) {
  FactorResult out;
  double added = 0.0;
  for (double jitter : {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
    if (jitter > 0.0) {
      K.diagonal().array() += jitter - added;
      added = jitter;
    }
    out.llt.compute(K);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = jitter;
      out.ok = true;
      return out;
    }
  }
  out.jitter = 1e-6;
  return out;
}

Eigen::MatrixXd build_gram(const KernelSpec& spec, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& per_point_noise) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < X.cols(); ++k) {
    const double inv_l2 = 1.0 / (spec.lengthscales[k] * spec.lengthscales[k]);
    const auto col = X.col(k);
    r2.noalias() += inv_l2 * (col.replicate(1, n) - col.transpose().replicate(n, 1))
                                 .array()
                                 .square()
                                 .matrix();
  }
  matern_from_r2(spec.nu, r2);
  r2 *= spec.signal_variance;
  r2.diagonal().array() += spec.noise_variance;
  if (per_point_noise.size() > 0) r2.diagonal() += per_point_noise;
  return r2;
}

void check_training_args(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                         const Eigen::VectorXd& per_point_noise) {
  if (inputs.rows() < 1) throw ArgumentError("gp: needs at least one training pair");
  if (inputs.rows() != targets.size()) {
    throw ArgumentError("gp: inputs and targets must have matching length");
  }
  if (per_point_noise.size() > 0) {
    if (per_point_noise.size() != targets.size()) {
      throw ArgumentError("gp: per-point noise must match the number of pairs");
    }
    if ((per_point_noise.array() < 0.0).any()) {
      throw ArgumentError("gp: per-point noise must be nonnegative");
    }
  }
}

// Per-dimension squared differences, fixed across a tuning run.
struct GramCache {
  std::vector<Eigen::MatrixXd> sqdiff;
  Eigen::Index n = 0;

  explicit GramCache(const Eigen::MatrixXd& X) : n(X.rows()) {
    sqdiff.reserve(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index k = 0; k < X.cols(); ++k) {
      const auto col = X.col(k);
      sqdiff.push_back(
          (col.replicate(1, n) - col.transpose().replicate(n, 1)).array().square());
    }
  }
};

// Log evidence for log-parameterized (lengthscales..., signal, noise);
// -inf when the Gram cannot be factored even after the jitter ladder.
double lml_from_cache(const GramCache& cache, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& per_point_noise, double nu,
                      const Eigen::VectorXd& log_params) {
  const auto d = static_cast<Eigen::Index>(cache.sqdiff.size());
  Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(cache.n, cache.n);
  for (Eigen::Index k = 0; k < d; ++k) {
    r2.noalias() += std::exp(-2.0 * log_params[k]) * cache.sqdiff[static_cast<std::size_t>(k)];
  }
  matern_from_r2(nu, r2);
  r2 *= std::exp(log_params[d]);
  r2.diagonal().array() += std::exp(log_params[d + 1]);
  if (per_point_noise.size() > 0) r2.diagonal() += per_point_noise;
  FactorResult fac = factor_with_jitter(std::move(r2));
  if (!fac.ok) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd alpha = fac.llt.solve(y);
  const double quad = y.dot(alpha);
  const double logdet =
      2.0 * fac.llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * quad - 0.5 * logdet -
         0.5 * static_cast<double>(cache.n) * kLog2Pi;
}

}  // namespace

void KernelSpec::validate() const {
  if (!valid_nu(nu)) throw ArgumentError("KernelSpec: nu must be 0.5, 1.5, or 2.5");
  if (!(signal_variance > 0.0)) {
    throw ArgumentError("KernelSpec: signal variance must be > 0");
  }
  if (lengthscales.size() < 1 || !(lengthscales.array() > 0.0).all()) {
    throw ArgumentError("KernelSpec: lengthscales must be positive");
  }
  if (!(noise_variance >= 0.0)) {
    throw ArgumentError("KernelSpec: noise variance must be >= 0");
  }
}

nlohmann::json KernelSpec::to_json() const {
  nlohmann::json j;
  j["nu"] = nu;
  j["signal_variance"] = signal_variance;
  j["lengthscales"] = std::vector<double>(
      lengthscales.data(), lengthscales.data() + lengthscales.size());
  j["noise_variance"] = noise_variance;
  return j;
}

KernelSpec KernelSpec::from_json(const nlohmann::json& j) {
  KernelSpec spec;
  spec.nu = j.at("nu").get<double>();
  spec.signal_variance = j.at("signal_variance").get<double>();
  const auto ls = j.at("lengthscales").get<std::vector<double>>();
  spec.lengthscales = Eigen::Map<const Eigen::VectorXd>(ls.data(),
                                                        static_cast<Eigen::Index>(ls.size()));
  spec.noise_variance = j.at("noise_variance").get<double>();
  spec.validate();
  return spec;
}

double matern_correlation(double nu, double r) {
  if (!valid_nu(nu)) throw ArgumentError("matern_correlation: nu must be 0.5, 1.5, or 2.5");
  if (!(r >= 0.0)) throw ArgumentError("matern_correlation: r must be >= 0");
  if (nu == 0.5) return std::exp(-r);
  if (nu == 1.5) {
    const double t = kSqrt3 * r;
    return (1.0 + t) * std::exp(-t);
  }
  const double t = kSqrt5 * r;
  return (1.0 + t + t * t / 3.0) * std::exp(-t);
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& a,
                   const Eigen::VectorXd& b) {
  spec.validate();
  if (a.size() != b.size() || a.size() != spec.lengthscales.size()) {
    throw ArgumentError("kernel_eval: dimension mismatch");
  }
  const double r2 =
      ((a - b).array() / spec.lengthscales.array()).square().sum();
  return spec.signal_variance * matern_correlation(spec.nu, std::sqrt(r2));
}

GpModel gp_fit(const KernelSpec& kernel, const Eigen::MatrixXd& inputs,
               const Eigen::VectorXd& targets, const Eigen::VectorXd& per_point_noise,
               const GpFitConfig& cfg) {
  kernel.validate();
  if (inputs.cols() != kernel.lengthscales.size()) {
    throw ArgumentError("gp_fit: input dimension must match lengthscales");
  }
  check_training_args(inputs, targets, per_point_noise);

  GpModel model;
  model.kernel = kernel;
  model.train_inputs = inputs;
  model.train_targets = targets;
  model.per_point_noise = per_point_noise;
  model.centered = cfg.center_targets;
  model.target_shift = cfg.center_targets ? targets.mean() : 0.0;

  FactorResult fac = factor_with_jitter(build_gram(kernel, inputs, per_point_noise));
  if (!fac.ok) {
    throw NumericalError(
        "gp_fit: Gram factorization failed after jitter escalation to 1e-6");
  }
  model.gram_factor = fac.llt.matrixL();
  model.alpha = fac.llt.solve(
      (targets.array() - model.target_shift).matrix().eval());
  model.jitter_used = fac.jitter;
  return model;
}

PredictiveDistribution gp_predict(const GpModel& model, const Eigen::VectorXd& query) {
  if (query.size() != model.train_inputs.cols()) {
    throw ArgumentError("gp_predict: query dimension mismatch");
  }
  const Eigen::Index n = model.train_inputs.rows();
  Eigen::VectorXd r2 = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < model.train_inputs.cols(); ++k) {
    const double inv_l2 =
        1.0 / (model.kernel.lengthscales[k] * model.kernel.lengthscales[k]);
    r2.array() +=
        inv_l2 * (model.train_inputs.col(k).array() - query[k]).square();
  }
  Eigen::VectorXd kstar(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    kstar[i] = model.kernel.signal_variance *
               matern_correlation(model.kernel.nu, std::sqrt(r2[i]));
  }

  PredictiveDistribution out;
  out.mean = model.target_shift + kstar.dot(model.alpha);
  const Eigen::VectorXd v =
      model.gram_factor.triangularView<Eigen::Lower>().solve(kstar);
  double var = model.kernel.signal_variance - v.squaredNorm();
  if (var < 0.0) {
    if (var < kVarianceClamp) {
      throw NumericalError("gp_predict: predictive variance " + std::to_string(var) +
                           " below the roundoff clamp");
    }
    var = 0.0;
  }
  out.variance = var;
  return out;
}

double log_marginal_likelihood(const KernelSpec& kernel, const Eigen::MatrixXd& inputs,
                               const Eigen::VectorXd& targets,
                               const Eigen::VectorXd& per_point_noise) {
  kernel.validate();
  if (inputs.cols() != kernel.lengthscales.size()) {
    throw ArgumentError("log_marginal_likelihood: input dimension must match lengthscales");
  }
  check_training_args(inputs, targets, per_point_noise);
  FactorResult fac = factor_with_jitter(build_gram(kernel, inputs, per_point_noise));
  if (!fac.ok) {
    throw NumericalError(
        "log_marginal_likelihood: Gram factorization failed after jitter escalation");
  }
  const Eigen::VectorXd alpha = fac.llt.solve(targets);
  const double logdet = 2.0 * fac.llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * targets.dot(alpha) - 0.5 * logdet -
         0.5 * static_cast<double>(targets.size()) * kLog2Pi;
}

KernelSpec tune_hyperparameters(const Eigen::MatrixXd& inputs,
                                const Eigen::VectorXd& targets,
                                const Eigen::VectorXd& per_point_noise,
                                const TuneConfig& cfg) {
  if (inputs.rows() < 3) throw ArgumentError("tune_hyperparameters: needs >= 3 pairs");
  check_training_args(inputs, targets, per_point_noise);
  if (!valid_nu(cfg.nu)) throw ArgumentError("tune_hyperparameters: invalid nu");
  if (cfg.restarts < 1) throw ArgumentError("tune_hyperparameters: restarts must be >= 1");

  const Eigen::Index d = inputs.cols();
  const Eigen::Index p = d + 2;
  Eigen::VectorXd lo(p), hi(p);
  for (Eigen::Index k = 0; k < d; ++k) {
    lo[k] = -5.0;
    hi[k] = 7.0;
  }
  lo[d] = -7.0;
  hi[d] = 4.0;      // log signal variance
  lo[d + 1] = -12.0;
  hi[d + 1] = 2.0;  // log noise variance

  Eigen::VectorXd y = targets;
  if (cfg.center_targets) y.array() -= targets.mean();

  const GramCache cache(inputs);
  auto objective = [&](const Eigen::VectorXd& log_params) {
    return -lml_from_cache(cache, y, per_point_noise, cfg.nu, log_params);
  };

  Rng rng(mix_seed(cfg.seed, 0x74756e65ULL));  // "tune"
  auto unit_starts = math::latin_hypercube(static_cast<int>(p), cfg.restarts, rng);
  std::vector<Eigen::VectorXd> starts;
  starts.reserve(unit_starts.size());
  for (const auto& u : unit_starts) {
    starts.push_back(lo.array() + u.array() * (hi - lo).array());
  }
  if (cfg.warm_start) {
    cfg.warm_start->validate();
    if (cfg.warm_start->lengthscales.size() != d) {
      throw ArgumentError("tune_hyperparameters: warm start dimension mismatch");
    }
    Eigen::VectorXd w(p);
    for (Eigen::Index k = 0; k < d; ++k) w[k] = std::log(cfg.warm_start->lengthscales[k]);
    w[d] = std::log(cfg.warm_start->signal_variance);
    w[d + 1] = std::log(std::max(cfg.warm_start->noise_variance, 1e-300));
    for (Eigen::Index k = 0; k < p; ++k) w[k] = std::min(hi[k], std::max(lo[k], w[k]));
    starts.front() = std::move(w);
  }

  math::NelderMeadOptions nm;
  nm.max_evals = cfg.max_evals_per_restart > 0 ? cfg.max_evals_per_restart
                                               : static_cast<int>(40 * p);
  nm.ftol_abs = cfg.ftol_abs;
  nm.xtol_abs = 1e-6;
  nm.initial_step = 0.1;

  double best_f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  for (const auto& start : starts) {
    const auto result = math::nelder_mead(objective, start, lo, hi, nm);
    if (result.fx < best_f) {
      best_f = result.fx;
      best_x = result.x;
    }
  }
  if (!std::isfinite(best_f)) {
    throw NumericalError(
        "tune_hyperparameters: every restart failed to factor a Gram matrix");
  }

  KernelSpec spec;
  spec.nu = cfg.nu;
  spec.lengthscales = best_x.head(d).array().exp();
  spec.signal_variance = std::exp(best_x[d]);
  spec.noise_variance = std::exp(best_x[d + 1]);
  return spec;
}

nlohmann::json GpModel::to_json() const {
  nlohmann::json j;
  j["kernel"] = kernel.to_json();
  nlohmann::json inputs = nlohmann::json::array();
  for (Eigen::Index i = 0; i < train_inputs.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < train_inputs.cols(); ++k) row.push_back(train_inputs(i, k));
    inputs.push_back(std::move(row));
  }
  j["inputs"] = std::move(inputs);
  j["targets"] =
      std::vector<double>(train_targets.data(), train_targets.data() + train_targets.size());
  if (per_point_noise.size() > 0) {
    j["per_point_noise"] = std::vector<double>(
        per_point_noise.data(), per_point_noise.data() + per_point_noise.size());
  }
  j["centered"] = centered;
  return j;
}

GpModel GpModel::from_json(const nlohmann::json& j) {
  const KernelSpec spec = KernelSpec::from_json(j.at("kernel"));
  const auto& jin = j.at("inputs");
  const auto n = static_cast<Eigen::Index>(jin.size());
  if (n < 1) throw ArgumentError("GpModel::from_json: empty training set");
  const auto d = static_cast<Eigen::Index>(jin.front().size());
  Eigen::MatrixXd X(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = jin.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != d) {
      throw ArgumentError("GpModel::from_json: ragged inputs");
    }
    for (Eigen::Index k = 0; k < d; ++k) X(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  const auto targets = j.at("targets").get<std::vector<double>>();
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
      targets.data(), static_cast<Eigen::Index>(targets.size()));
  Eigen::VectorXd noise;
  if (j.contains("per_point_noise")) {
    const auto v = j.at("per_point_noise").get<std::vector<double>>();
    noise = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  GpFitConfig cfg;
  cfg.center_targets = j.value("centered", true);
  return gp_fit(spec, X, y, noise, cfg);
}

}  // namespace dtrbo::gp
