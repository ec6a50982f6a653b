#include "dtrbo/simbench.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "dtrbo/errors.hpp"
#include "dtrbo/math/quadrature.hpp"
#include "dtrbo/math/stats.hpp"
#include "dtrbo/parallel.hpp"
#include "dtrbo/rng.hpp"

namespace dtrbo::simbench {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Antiderivative of τ_setting with A(0) = 0.
double effect_antiderivative(const DgpSpec& spec, double x) {
  switch (spec.setting) {
    case 1:
      if (!spec.setting1_corrected) return x;
      // τ = 1 outside (0.25, 0.75) and x/2 inside it.
      if (x <= 0.25) return x;
      if (x <= 0.75) return 0.25 + (x * x - 0.0625) / 4.0;
      return x - 0.375;
    case 2:
      return std::sin(kTwoPi * x) / kTwoPi;
    default:
      return std::sin(2.0 * kTwoPi * x) / (2.0 * kTwoPi);
  }
}

}  // namespace

void DgpSpec::validate() const {
  if (setting < 1 || setting > 3) throw ArgumentError("DgpSpec: setting must be 1, 2, or 3");
  if (!(w > 0.0)) throw ArgumentError("DgpSpec: w must be > 0");
  if (n < 1) throw ArgumentError("DgpSpec: n must be >= 1");
}

nlohmann::json DgpSpec::to_json() const {
  return {{"setting", setting}, {"w", w},           {"gamma0", gamma0},
          {"gamma1", gamma1},   {"n", n},           {"setting1_corrected", setting1_corrected}};
}

DgpSpec DgpSpec::from_json(const nlohmann::json& j) {
  DgpSpec spec;
  spec.setting = j.value("setting", spec.setting);
  spec.w = j.value("w", spec.w);
  spec.gamma0 = j.value("gamma0", spec.gamma0);
  spec.gamma1 = j.value("gamma1", spec.gamma1);
  spec.n = j.value("n", spec.n);
  spec.setting1_corrected = j.value("setting1_corrected", spec.setting1_corrected);
  spec.validate();
  return spec;
}

double treatment_effect(const DgpSpec& spec, double x) {
  switch (spec.setting) {
    case 1: {
      if (!spec.setting1_corrected) return (x < 0.75 || x > 0.25) ? 1.0 : 0.0;
      const double ind = (x < 0.25 || x > 0.75) ? 1.0 : 0.0;
      return ind + 0.5 * x * (1.0 - ind);
    }
    case 2:
      return std::cos(kTwoPi * x);
    default:
      return std::cos(2.0 * kTwoPi * x);
  }
}

estimators::TrajectoryDataset generate_dataset(const DgpSpec& spec, std::uint64_t seed) {
  spec.validate();
  estimators::TrajectoryDataset data;
  data.x_names = {"x"};
  data.records.reserve(static_cast<std::size_t>(spec.n));
  Rng rng(seed);
  for (int i = 0; i < spec.n; ++i) {
    estimators::Trajectory t;
    const double x = spec.w * rng.uniform();
    t.x = (Eigen::VectorXd(1) << x).finished();
    t.a = rng.bernoulli(0.5) ? 1 : 0;
    t.propensity = 0.5;
    t.y = spec.gamma0 + spec.gamma1 * x + t.a * treatment_effect(spec, x);
    data.records.push_back(std::move(t));
  }
  return data;
}

OracleValue oracle_value(const DgpSpec& spec, const policy::ThresholdPolicy& pol,
                         OracleMethod method) {
  spec.validate();
  // Treated region: (0, lo1) ∪ (start2, w).
  const double lo1 = std::clamp(pol.beta1, 0.0, spec.w);
  const double start2 = std::clamp(std::max(pol.beta2, lo1), lo1, spec.w);

  double integral;
  if (method == OracleMethod::closed_form) {
    integral = effect_antiderivative(spec, lo1) - effect_antiderivative(spec, 0.0) +
               effect_antiderivative(spec, spec.w) - effect_antiderivative(spec, start2);
  } else {
    const auto tau = [&](double x) { return treatment_effect(spec, x); };
    // Split each piece at the corrected indicator's jumps so the quadrature
    // never straddles a discontinuity.
    const auto piece = [&](double a, double b) {
      double total = 0.0;
      std::vector<double> knots = {a};
      if (spec.setting == 1 && spec.setting1_corrected) {
        for (double c : {0.25, 0.75}) {
          if (c > a && c < b) knots.push_back(c);
        }
      }
      knots.push_back(b);
      for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        total += math::adaptive_simpson(tau, knots[k], knots[k + 1], 1e-11);
      }
      return total;
    };
    integral = piece(0.0, lo1) + piece(start2, spec.w);
  }

  OracleValue out;
  out.beta1 = pol.beta1;
  out.beta2 = pol.beta2;
  out.method = method;
  out.value = spec.gamma0 + spec.gamma1 * spec.w / 2.0 + integral / spec.w;
  return out;
}

TrueOptimum true_optimum(const DgpSpec& spec) {
  spec.validate();
  using Key = std::tuple<int, double, double, double, bool>;
  static std::map<Key, TrueOptimum> cache;
  static std::mutex cache_mutex;
  const Key key{spec.setting, spec.w, spec.gamma0, spec.gamma1, spec.setting1_corrected};
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }

  constexpr int kRes = 400;
  TrueOptimum best;
  best.value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kRes; ++i) {
    const double b1 = static_cast<double>(i) / (kRes - 1);
    for (int j = 0; j < kRes; ++j) {
      const double b2 = static_cast<double>(j) / (kRes - 1);
      const double v = oracle_value(spec, policy::ThresholdPolicy{b1, b2}).value;
      if (v > best.value) {
        best.value = v;
        best.theta = Eigen::Vector2d(b1, b2);
      }
    }
  }
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache.emplace(key, best);
  return best;
}

nlohmann::json RunSummary::to_json() const {
  nlohmann::json j;
  j["dgp"] = dgp.to_json();
  j["estimator"] = estimator;
  j["mse"] = mse;
  j["mc_error"] = mc_error;
  j["runs_completed"] = runs_completed;
  j["runs_excluded"] = runs_excluded;
  j["true_value"] = true_value;
  j["true_theta"] = {true_theta[0], true_theta[1]};
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : run_records) {
    runs.push_back({{"best_theta", {r.best_theta[0], r.best_theta[1]}},
                    {"best_estimate", r.best_estimate},
                    {"oracle_at_best", r.oracle_at_best},
                    {"sq_error", r.sq_error}});
  }
  j["runs"] = runs;
  return j;
}

RunSummary run_study_cell(const StudyConfig& cfg, std::uint64_t seed) {
  cfg.dgp.validate();
  if (cfg.runs < 2) throw ArgumentError("run_study_cell: needs >= 2 runs");
  const TrueOptimum truth = true_optimum(cfg.dgp);
  const policy::ParamBox box(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 1.0),
                             {"beta1", "beta2"});
  const estimators::OutcomeRecipe recipe =
      cfg.recipe.terms.empty() ? estimators::OutcomeRecipe::additive(1) : cfg.recipe;

  struct RunSlot {
    bool ok = false;
    RunRecord rec;
  };
  std::vector<RunSlot> slots(static_cast<std::size_t>(cfg.runs));

  parallel_for(
      slots.size(),
      [&](std::size_t run) {
        const std::uint64_t run_seed = mix_seed(seed, 0x72756e73ULL, run);
        const auto data = generate_dataset(cfg.dgp, mix_seed(run_seed, 0x64617461ULL));
        estimators::OutcomeModel model;
        const bool needs_model = cfg.kind == estimators::EstimatorKind::gcomp ||
                                 cfg.kind == estimators::EstimatorKind::aipwe;
        if (needs_model) model = estimators::fit_outcome_model(data, recipe);

        const bayesopt::Evaluator evaluator = [&](const policy::PolicyParams& theta) {
          const policy::Policy pol{policy::ThresholdPolicy{theta[0], theta[1]}};
          estimators::ValueEstimate est;
          switch (cfg.kind) {
            case estimators::EstimatorKind::ipw: est = estimators::ipw_value(data, pol); break;
            case estimators::EstimatorKind::sipw: est = estimators::sipw_value(data, pol); break;
            case estimators::EstimatorKind::gcomp:
              est = estimators::gcomp_value(data, pol, model);
              break;
            case estimators::EstimatorKind::aipwe:
              est = estimators::aipwe_value(data, pol, model);
              break;
          }
          return std::make_pair(est.value, est.std_dev);
        };

        try {
          const auto trace =
              bayesopt::optimize_policy(evaluator, box, cfg.budget, cfg.gp, run_seed);
          RunRecord rec;
          rec.best_theta = Eigen::Vector2d(trace.best_theta[0], trace.best_theta[1]);
          rec.best_estimate = trace.best_value;
          rec.oracle_at_best =
              oracle_value(cfg.dgp, policy::ThresholdPolicy{rec.best_theta[0],
                                                            rec.best_theta[1]})
                  .value;
          rec.sq_error = (rec.oracle_at_best - truth.value) * (rec.oracle_at_best - truth.value);
          slots[run] = {true, rec};
        } catch (const bayesopt::EvaluatorFailure&) {
        } catch (const EstimationError&) {
        } catch (const NumericalError&) {
        } catch (const ConvergenceError&) {
        }
      },
      cfg.n_threads);

  RunSummary summary;
  summary.dgp = cfg.dgp;
  summary.estimator = estimators::to_string(cfg.kind);
  summary.true_value = truth.value;
  summary.true_theta = truth.theta;
  std::vector<double> sq_errors;
  for (const auto& slot : slots) {
    if (!slot.ok) {
      ++summary.runs_excluded;
      continue;
    }
    summary.run_records.push_back(slot.rec);
    sq_errors.push_back(slot.rec.sq_error);
  }
  summary.runs_completed = static_cast<int>(sq_errors.size());
  if (summary.runs_completed < 2) {
    throw EstimationError("run_study_cell: fewer than 2 runs survived");
  }
  summary.mse = math::mean(sq_errors);
  summary.mc_error =
      math::sample_sd(sq_errors) / std::sqrt(static_cast<double>(sq_errors.size()));
  return summary;
}

std::vector<RunSummary> run_simulation_study(const std::vector<StudyConfig>& cells,
                                             std::uint64_t seed) {
  std::vector<RunSummary> out;
  out.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out.push_back(run_study_cell(cells[i], mix_seed(seed, 0x63656c6cULL, i)));
  }
  return out;
}

}  // namespace dtrbo::simbench
