#include "dtrbo/bayesopt.hpp"

#include <algorithm>
#include <cmath>

#include "dtrbo/errors.hpp"
#include "dtrbo/io/csv.hpp"
#include "dtrbo/math/nelder_mead.hpp"
#include "dtrbo/math/normal.hpp"
#include "dtrbo/math/sequences.hpp"
#include "dtrbo/rng.hpp"

namespace dtrbo::bayesopt {

namespace {

constexpr std::uint64_t kTagDesign = 0x64657369676eULL;   // "design"
constexpr std::uint64_t kTagHalton = 0x65692d68ULL;       // candidate stream
constexpr std::uint64_t kTagPerturb = 0x65692d70ULL;      // perturbation stream
constexpr std::uint64_t kTagTune = 0x74756e65ULL;         // hyperparameter search

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

}  // namespace

std::vector<policy::PolicyParams> space_filling_design(const policy::ParamBox& box, int b,
                                                       std::uint64_t seed) {
  if (b < 1) throw ArgumentError("space_filling_design: b must be >= 1");
  Rng rng(mix_seed(seed, kTagDesign));
  auto unit = math::latin_hypercube(static_cast<int>(box.dim()), b, rng);
  std::vector<policy::PolicyParams> design;
  design.reserve(unit.size());
  for (const auto& u : unit) design.push_back(box.from_unit(u));
  return design;
}

double expected_improvement(const gp::GpModel& model, const Eigen::VectorXd& theta,
                            double f_min) {
  const auto pred = gp::gp_predict(model, theta);
  const double gap = f_min - pred.mean;
  const double sigma = std::sqrt(pred.variance);
  if (sigma < 1e-12) return std::max(gap, 0.0);
  const double z = gap / sigma;
  const double ei = gap * math::norm_cdf(z) + sigma * math::norm_pdf(z);
  return std::max(ei, 0.0);
}

policy::PolicyParams maximize_ei(const gp::GpModel& model, const policy::ParamBox& box,
                                 double f_min, std::uint64_t seed) {
  const auto d = static_cast<int>(box.dim());
  if (model.train_inputs.cols() != box.dim()) {
    throw ArgumentError("maximize_ei: model and box dimensions differ");
  }

  std::vector<Eigen::VectorXd> candidates;
  candidates.reserve(2048 + 2 * static_cast<std::size_t>(model.train_inputs.rows()));
  for (const auto& u : math::halton_sequence(d, 2048, mix_seed(seed, kTagHalton))) {
    candidates.push_back(box.from_unit(u));
  }
  // Local candidates anchored at past evaluations: a jittered copy of each
  // point plus midpoints of consecutive pairs — cheap exploitation seeds.
  Rng perturb(mix_seed(seed, kTagPerturb));
  const Eigen::VectorXd width = box.upper - box.lower;
  const Eigen::Index n = model.train_inputs.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd p = model.train_inputs.row(i);
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      p[k] += width[k] / 64.0 * perturb.normal();
    }
    candidates.push_back(box.clamp(std::move(p)));
    if (i + 1 < n) {
      candidates.push_back(0.5 * (model.train_inputs.row(i) + model.train_inputs.row(i + 1)));
    }
  }

  std::vector<double> scores(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scores[i] = expected_improvement(model, candidates[i], f_min);
  }

  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return lex_less(candidates[a], candidates[b]);
  };
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t top = std::min<std::size_t>(5, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top),
                    order.end(), better);

  Eigen::VectorXd best = candidates[order[0]];
  double best_ei = scores[order[0]];
  math::NelderMeadOptions nm;
  nm.max_evals = 80;
  nm.ftol_abs = 1e-14;
  nm.xtol_abs = 1e-9;
  nm.initial_step = 1.0 / 64.0;
  auto neg_ei = [&](const Eigen::VectorXd& x) {
    return -expected_improvement(model, x, f_min);
  };
  for (std::size_t r = 0; r < top; ++r) {
    const auto refined = math::nelder_mead(neg_ei, candidates[order[r]], box.lower,
                                           box.upper, nm);
    const double ei = -refined.fx;
    if (ei > best_ei || (ei == best_ei && lex_less(refined.x, best))) {
      best = refined.x;
      best_ei = ei;
    }
  }
  return best;
}

OptimizationTrace optimize_policy(const Evaluator& evaluator, const policy::ParamBox& box,
                                  const Budget& budget, const GpConfig& gp_config,
                                  std::uint64_t seed) {
  if (budget.n_initial < 1) throw ArgumentError("optimize_policy: n_initial must be >= 1");
  if (budget.n_ei < 0) throw ArgumentError("optimize_policy: n_ei must be >= 0");

  OptimizationTrace trace;
  trace.param_names = box.names;
  if (trace.param_names.empty()) {
    for (Eigen::Index k = 0; k < box.dim(); ++k) {
      trace.param_names.push_back("theta" + std::to_string(k + 1));
    }
  }

  auto finalize = [&trace] {
    std::size_t best = 0;
    for (std::size_t i = 1; i < trace.records.size(); ++i) {
      if (trace.records[i].value > trace.records[best].value) best = i;
    }
    trace.best_theta = trace.records[best].theta;
    trace.best_value = trace.records[best].value;
    trace.budget_used = static_cast<int>(trace.records.size());
  };

  auto evaluate = [&](const policy::PolicyParams& theta, const char* source) {
    std::pair<double, double> result;
    try {
      result = evaluator(theta);
    } catch (const std::exception& e) {
      if (!trace.records.empty()) finalize();
      throw EvaluatorFailure(std::string("optimize_policy: evaluator failed: ") + e.what(),
                             trace);
    }
    trace.records.push_back({theta, result.first, result.second, source});
  };

  for (const auto& theta : space_filling_design(box, budget.n_initial, seed)) {
    evaluate(theta, "initial-design");
  }

  if (budget.n_ei > 0) {
    const auto d = box.dim();
    auto negated_model = [&](const gp::KernelSpec& spec) {
      const auto n = static_cast<Eigen::Index>(trace.records.size());
      Eigen::MatrixXd X(n, d);
      Eigen::VectorXd g(n), noise(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& rec = trace.records[static_cast<std::size_t>(i)];
        X.row(i) = rec.theta;
        g[i] = -rec.value;
        noise[i] = rec.std_dev * rec.std_dev;
      }
      gp::GpFitConfig fit_cfg;
      fit_cfg.center_targets = gp_config.center_targets;
      return gp::gp_fit(spec, X, g, noise, fit_cfg);
    };
    auto tune = [&](int restarts, int max_evals, std::uint64_t step,
                    const std::optional<gp::KernelSpec>& warm) {
      const auto n = static_cast<Eigen::Index>(trace.records.size());
      Eigen::MatrixXd X(n, d);
      Eigen::VectorXd g(n), noise(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& rec = trace.records[static_cast<std::size_t>(i)];
        X.row(i) = rec.theta;
        g[i] = -rec.value;
        noise[i] = rec.std_dev * rec.std_dev;
      }
      gp::TuneConfig cfg;
      cfg.nu = gp_config.nu;
      cfg.center_targets = gp_config.center_targets;
      cfg.restarts = restarts;
      cfg.max_evals_per_restart = max_evals;
      cfg.seed = mix_seed(seed, kTagTune, step);
      cfg.warm_start = warm;
      return gp::tune_hyperparameters(X, g, noise, cfg);
    };

    gp::KernelSpec spec =
        tune(gp_config.tune_restarts, gp_config.tune_max_evals, 0, std::nullopt);
    gp::GpModel model = negated_model(spec);

    for (int t = 1; t <= budget.n_ei; ++t) {
      double f_min = -trace.records.front().value;
      for (const auto& rec : trace.records) f_min = std::min(f_min, -rec.value);

      const auto theta = maximize_ei(model, box, f_min,
                                     mix_seed(seed, kTagHalton, static_cast<std::uint64_t>(t)));
      if (expected_improvement(model, theta, f_min) <= budget.ei_stop_threshold) break;

      evaluate(theta, "ei-step");
      spec = tune(gp_config.retune_restarts, gp_config.retune_max_evals,
                  static_cast<std::uint64_t>(t), spec);
      model = negated_model(spec);
    }
  }

  finalize();
  return trace;
}

nlohmann::json OptimizationTrace::to_json() const {
  nlohmann::json j;
  j["param_names"] = param_names;
  nlohmann::json records_json = nlohmann::json::array();
  for (const auto& rec : records) {
    nlohmann::json r;
    r["theta"] = std::vector<double>(rec.theta.data(), rec.theta.data() + rec.theta.size());
    r["value"] = rec.value;
    r["std_dev"] = rec.std_dev;
    r["source"] = rec.source;
    records_json.push_back(std::move(r));
  }
  j["records"] = std::move(records_json);
  j["best_theta"] =
      std::vector<double>(best_theta.data(), best_theta.data() + best_theta.size());
  j["best_value"] = best_value;
  j["budget_used"] = budget_used;
  return j;
}

std::string OptimizationTrace::to_csv() const {
  std::string out = "iteration";
  for (const auto& name : param_names) out += "," + name;
  out += ",value,std_dev,source\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    out += std::to_string(i + 1);
    for (Eigen::Index k = 0; k < rec.theta.size(); ++k) out += "," + io::fmt17(rec.theta[k]);
    out += "," + io::fmt17(rec.value) + "," + io::fmt17(rec.std_dev) + "," + rec.source + "\n";
  }
  return out;
}

OptimizationTrace OptimizationTrace::from_csv(const std::string& csv_text) {
  const io::CsvTable table = io::parse_csv(csv_text);
  const auto ncols = table.header.size();
  if (ncols < 5 || table.header.front() != "iteration" || table.header[ncols - 3] != "value" ||
      table.header[ncols - 2] != "std_dev" || table.header[ncols - 1] != "source") {
    throw ArgumentError("OptimizationTrace: unexpected trace header");
  }
  OptimizationTrace trace;
  trace.param_names.assign(table.header.begin() + 1, table.header.end() - 3);
  const auto d = static_cast<Eigen::Index>(trace.param_names.size());
  for (const auto& row : table.rows) {
    EvaluationRecord rec;
    rec.theta.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      rec.theta[k] = io::parse_double(row[static_cast<std::size_t>(k) + 1]);
    }
    rec.value = io::parse_double(row[ncols - 3]);
    rec.std_dev = io::parse_double(row[ncols - 2]);
    rec.source = row[ncols - 1];
    trace.records.push_back(std::move(rec));
  }
  if (trace.records.empty()) throw ArgumentError("OptimizationTrace: no records");
  trace.budget_used = static_cast<int>(trace.records.size());
  std::size_t best = 0;
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    if (trace.records[i].value > trace.records[best].value) best = i;
  }
  trace.best_theta = trace.records[best].theta;
  trace.best_value = trace.records[best].value;
  return trace;
}

}  // namespace dtrbo::bayesopt
