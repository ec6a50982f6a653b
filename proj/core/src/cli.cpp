#include "dtrbo/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "dtrbo/bayesopt.hpp"
#include "dtrbo/compliance.hpp"
#include "dtrbo/errors.hpp"
#include "dtrbo/estimators.hpp"
#include "dtrbo/io/csv.hpp"
#include "dtrbo/math/mcmc.hpp"
#include "dtrbo/policy.hpp"
#include "dtrbo/rng.hpp"
#include "dtrbo/simbench.hpp"
#include "dtrbo/surface.hpp"

namespace dtrbo {

namespace {

namespace fs = std::filesystem;

// DGP flags shared by several subcommands. Precedence: flag > config > default.
struct DgpFlags {
  int setting = 1;
  double w = 1.0;
  double gamma0 = 0.0;
  double gamma1 = 1.0;
  int n = 200;
  bool corrected = false;
  CLI::Option *o_setting{}, *o_w{}, *o_g0{}, *o_g1{}, *o_n{}, *o_corr{};

  void attach(CLI::App* sub) {
    o_setting = sub->add_option("--setting", setting, "DGP setting (1, 2, or 3)");
    o_w = sub->add_option("--w", w, "Covariate scale w");
    o_g0 = sub->add_option("--gamma0", gamma0, "Baseline intercept");
    o_g1 = sub->add_option("--gamma1", gamma1, "Baseline slope");
    o_n = sub->add_option("--n", n, "Sample size");
    o_corr = sub->add_flag("--corrected", corrected, "Corrected Setting-1 indicator");
  }
  bool any_given() const {
    return o_setting->count() || o_w->count() || o_g0->count() || o_g1->count() ||
           o_n->count() || o_corr->count();
  }
  simbench::DgpSpec resolve(const nlohmann::json& cfg) const {
    simbench::DgpSpec s = cfg.contains("dgp") ? simbench::DgpSpec::from_json(cfg.at("dgp"))
                                              : simbench::DgpSpec{};
    if (o_setting->count()) s.setting = setting;
    if (o_w->count()) s.w = w;
    if (o_g0->count()) s.gamma0 = gamma0;
    if (o_g1->count()) s.gamma1 = gamma1;
    if (o_n->count()) s.n = n;
    if (o_corr->count()) s.setting1_corrected = corrected;
    s.validate();
    return s;
  }
};

struct BudgetFlags {
  int n_initial = 50;
  int n_ei = 50;
  double ei_stop = 1e-6;
  CLI::Option *o_init{}, *o_ei{}, *o_stop{};

  void attach(CLI::App* sub) {
    o_init = sub->add_option("--n-initial", n_initial, "Initial space-filling evaluations");
    o_ei = sub->add_option("--n-ei", n_ei, "Acquisition-guided evaluations");
    o_stop = sub->add_option("--ei-stop", ei_stop, "Stop when max EI falls below this");
  }
  bayesopt::Budget resolve(const nlohmann::json& cfg) const {
    bayesopt::Budget b;
    if (cfg.contains("budget")) {
      const auto& j = cfg.at("budget");
      b.n_initial = j.value("n_initial", b.n_initial);
      b.n_ei = j.value("n_ei", b.n_ei);
      b.ei_stop_threshold = j.value("ei_stop_threshold", b.ei_stop_threshold);
    }
    if (o_init->count()) b.n_initial = n_initial;
    if (o_ei->count()) b.n_ei = n_ei;
    if (o_stop->count()) b.ei_stop_threshold = ei_stop;
    return b;
  }
};

bayesopt::GpConfig resolve_gp(const nlohmann::json& cfg) {
  bayesopt::GpConfig g;
  if (cfg.contains("gp")) {
    const auto& j = cfg.at("gp");
    g.nu = j.value("nu", g.nu);
    g.center_targets = j.value("center_targets", g.center_targets);
    g.tune_restarts = j.value("tune_restarts", g.tune_restarts);
    g.tune_max_evals = j.value("tune_max_evals", g.tune_max_evals);
    g.retune_restarts = j.value("retune_restarts", g.retune_restarts);
    g.retune_max_evals = j.value("retune_max_evals", g.retune_max_evals);
  }
  return g;
}

struct McmcFlags {
  int chains = 4;
  int iters = 5000;
  int burnin = 2500;
  CLI::Option *o_chains{}, *o_iters{}, *o_burnin{};

  void attach(CLI::App* sub) {
    o_chains = sub->add_option("--mcmc-chains", chains, "Number of chains");
    o_iters = sub->add_option("--mcmc-iters", iters, "Iterations per chain");
    o_burnin = sub->add_option("--mcmc-burnin", burnin, "Burn-in iterations per chain");
  }
  math::McmcConfig resolve(const nlohmann::json& cfg) const {
    math::McmcConfig m;
    if (cfg.contains("mcmc")) {
      const auto& j = cfg.at("mcmc");
      m.n_chains = j.value("n_chains", m.n_chains);
      m.n_iter = j.value("n_iter", m.n_iter);
      m.n_burnin = j.value("n_burnin", m.n_burnin);
      m.target_accept = j.value("target_accept", m.target_accept);
      m.adapt_batch = j.value("adapt_batch", m.adapt_batch);
      m.init_jitter = j.value("init_jitter", m.init_jitter);
    }
    if (o_chains->count()) m.n_chains = chains;
    if (o_iters->count()) m.n_iter = iters;
    if (o_burnin->count()) m.n_burnin = burnin;
    return m;
  }
};

estimators::ValueEstimate estimate_value(const estimators::TrajectoryDataset& data,
                                         const policy::Policy& pol,
                                         estimators::EstimatorKind kind,
                                         const estimators::OutcomeModel& model) {
  switch (kind) {
    case estimators::EstimatorKind::ipw: return estimators::ipw_value(data, pol);
    case estimators::EstimatorKind::sipw: return estimators::sipw_value(data, pol);
    case estimators::EstimatorKind::gcomp: return estimators::gcomp_value(data, pol, model);
    default: return estimators::aipwe_value(data, pol, model);
  }
}

estimators::OutcomeRecipe resolve_recipe(const std::string& name, int x_dim) {
  if (name == "additive") return estimators::OutcomeRecipe::additive(x_dim);
  if (name == "interacted") return estimators::OutcomeRecipe::interacted(x_dim);
  throw ArgumentError("unknown outcome recipe: " + name);
}

std::string out_path(const std::string& out_dir, const std::string& name) {
  fs::create_directories(out_dir);
  return (fs::path(out_dir) / name).string();
}

simbench::OracleMethod method_from_string(const std::string& name) {
  if (name == "closed" || name == "closed-form") return simbench::OracleMethod::closed_form;
  if (name == "quadrature") return simbench::OracleMethod::quadrature;
  throw ArgumentError("unknown oracle method: " + name);
}

policy::ParamBox unit_box2(double lo, double hi) {
  return policy::ParamBox(Eigen::Vector2d(lo, lo), Eigen::Vector2d(hi, hi),
                          {"theta1", "theta2"});
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"Policy-value Bayesian optimization and off-policy evaluation toolkit"};
  app.name("dtrbo");
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string config_path;
  std::string out_dir = ".";
  app.add_option("--seed", seed, "Master RNG seed");
  app.add_option("--config", config_path, "JSON config file (dgp/budget/gp/mcmc blocks)");
  app.add_option("--out", out_dir, "Output directory");

  auto* sim_cmd = app.add_subcommand("simulate", "Draw a synthetic dataset to CSV");
  sim_cmd->fallthrough();
  DgpFlags sim_dgp;
  sim_dgp.attach(sim_cmd);
  bool sim_compliance = false;
  sim_cmd->add_flag("--compliance", sim_compliance,
                    "Emit a two-stage partial-compliance dataset instead");

  auto* oracle_cmd = app.add_subcommand("oracle", "Print the true value of a policy");
  oracle_cmd->fallthrough();
  DgpFlags oracle_dgp;
  oracle_dgp.attach(oracle_cmd);
  double oracle_b1 = 0.0, oracle_b2 = 0.0;
  std::string oracle_method = "closed";
  oracle_cmd->add_option("--beta1", oracle_b1, "Lower threshold")->required();
  oracle_cmd->add_option("--beta2", oracle_b2, "Upper threshold")->required();
  oracle_cmd->add_option("--method", oracle_method, "closed or quadrature");

  auto* opt_cmd = app.add_subcommand("optimize", "Search for the best policy, emit the trace");
  opt_cmd->fallthrough();
  DgpFlags opt_dgp;
  opt_dgp.attach(opt_cmd);
  BudgetFlags opt_budget;
  opt_budget.attach(opt_cmd);
  std::string opt_data, opt_estimator = "ipw", opt_recipe = "additive";
  double opt_lo = 0.0, opt_hi = 1.0;
  opt_cmd->add_option("--data", opt_data, "Trajectory CSV (omit to simulate from the DGP)");
  opt_cmd->add_option("--estimator", opt_estimator, "ipw, sipw, gcomp, or aipwe");
  opt_cmd->add_option("--recipe", opt_recipe, "Outcome basis: additive or interacted");
  opt_cmd->add_option("--box-lo", opt_lo, "Lower corner of the search box");
  opt_cmd->add_option("--box-hi", opt_hi, "Upper corner of the search box");

  auto* char_cmd = app.add_subcommand("characterize",
                                      "Grid the surrogate value surface, emit CSV/JSON/SVG");
  char_cmd->fallthrough();
  DgpFlags char_dgp;
  char_dgp.attach(char_cmd);
  BudgetFlags char_budget;
  char_budget.attach(char_cmd);
  std::string char_trace, char_estimator = "ipw", char_recipe = "additive";
  int char_resolution = 100;
  double char_lo = 0.0, char_hi = 1.0;
  char_cmd->add_option("--trace", char_trace, "Evaluation trace CSV (omit to run a search)");
  char_cmd->add_option("--estimator", char_estimator, "ipw, sipw, gcomp, or aipwe");
  char_cmd->add_option("--recipe", char_recipe, "Outcome basis: additive or interacted");
  char_cmd->add_option("--resolution", char_resolution, "Grid points per dimension");
  char_cmd->add_option("--box-lo", char_lo, "Lower corner of the policy box");
  char_cmd->add_option("--box-hi", char_hi, "Upper corner of the policy box");

  auto* bench_cmd = app.add_subcommand("bench", "Repeated-run study for one design cell");
  bench_cmd->fallthrough();
  DgpFlags bench_dgp;
  bench_dgp.attach(bench_cmd);
  BudgetFlags bench_budget;
  bench_budget.attach(bench_cmd);
  std::string bench_estimator = "ipw", bench_recipe = "additive";
  int bench_runs = 200, bench_threads = 0;
  bench_cmd->add_option("--estimator", bench_estimator, "ipw, sipw, gcomp, or aipwe");
  bench_cmd->add_option("--recipe", bench_recipe, "Outcome basis: additive or interacted");
  bench_cmd->add_option("--runs", bench_runs, "Simulation runs");
  bench_cmd->add_option("--threads", bench_threads, "Worker threads (0 = hardware)");

  auto* cfit_cmd = app.add_subcommand("compliance-fit",
                                      "Fit the compliance and outcome posteriors");
  cfit_cmd->fallthrough();
  McmcFlags cfit_mcmc;
  cfit_mcmc.attach(cfit_cmd);
  std::string cfit_data;
  bool cfit_demo = false;
  int cfit_n = 1000;
  double cfit_prior = 3.0;
  cfit_cmd->add_option("--data", cfit_data, "Two-stage compliance CSV");
  cfit_cmd->add_flag("--demo", cfit_demo, "Fit a freshly simulated demo cohort");
  cfit_cmd->add_option("--demo-n", cfit_n, "Demo cohort size");
  cfit_cmd->add_option("--prior-scale", cfit_prior, "Outcome-coefficient prior variance");

  auto* cval_cmd =
      app.add_subcommand("compliance-value", "Posterior value of a two-feature threshold rule");
  cval_cmd->fallthrough();
  McmcFlags cval_mcmc;
  cval_mcmc.attach(cval_cmd);
  std::string cval_data;
  bool cval_demo = false;
  int cval_n = 1000;
  double cval_prior = 3.0;
  double cval_t1 = 0.0, cval_t2 = 0.0;
  int cval_population = 10000, cval_repeats = 30, cval_draws = 100;
  cval_cmd->add_option("--data", cval_data, "Two-stage compliance CSV");
  cval_cmd->add_flag("--demo", cval_demo, "Evaluate on a freshly simulated demo cohort");
  cval_cmd->add_option("--demo-n", cval_n, "Demo cohort size");
  cval_cmd->add_option("--prior-scale", cval_prior, "Outcome-coefficient prior variance");
  cval_cmd->add_option("--theta1", cval_t1, "Treat when c0 < theta1 ...")->required();
  cval_cmd->add_option("--theta2", cval_t2, "... or w0 > theta2")->required();
  cval_cmd->add_option("--population", cval_population, "Resamples per value draw");
  cval_cmd->add_option("--repeats", cval_repeats, "Value draws averaged per posterior draw");
  cval_cmd->add_option("--draws", cval_draws, "Posterior value draws");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    nlohmann::json cfg = nlohmann::json::object();
    if (!config_path.empty()) cfg = nlohmann::json::parse(io::read_file(config_path));

    if (app.got_subcommand(sim_cmd)) {
      if (sim_compliance) {
        const int n = sim_dgp.o_n->count() ? sim_dgp.n : 1000;
        const auto data = compliance::generate_pad_like_data(compliance::PadSpec::demo(), n,
                                                             mix_seed(seed, 0x73696d63ULL));
        const std::string path = out_path(out_dir, "compliance.csv");
        compliance::write_compliance(path, data);
        std::cout << path << "\n";
      } else {
        const auto spec = sim_dgp.resolve(cfg);
        const auto data = generate_dataset(spec, mix_seed(seed, 0x73696d75ULL));
        const std::string path = out_path(out_dir, "dataset.csv");
        estimators::write_trajectories(path, data);
        std::cout << path << "\n";
      }
      return 0;
    }

    if (app.got_subcommand(oracle_cmd)) {
      const auto spec = oracle_dgp.resolve(cfg);
      const auto oracle = simbench::oracle_value(spec, policy::ThresholdPolicy{oracle_b1, oracle_b2},
                                                 method_from_string(oracle_method));
      std::cout << io::fmt17(oracle.value) << "\n";
      return 0;
    }

    if (app.got_subcommand(opt_cmd) || app.got_subcommand(char_cmd)) {
      const bool characterizing = app.got_subcommand(char_cmd);
      DgpFlags& dgp_flags = characterizing ? char_dgp : opt_dgp;
      BudgetFlags& budget_flags = characterizing ? char_budget : opt_budget;
      const std::string& estimator_name = characterizing ? char_estimator : opt_estimator;
      const std::string& recipe_name = characterizing ? char_recipe : opt_recipe;
      const double lo = characterizing ? char_lo : opt_lo;
      const double hi = characterizing ? char_hi : opt_hi;
      const policy::ParamBox box = unit_box2(lo, hi);

      bayesopt::OptimizationTrace trace;
      bool have_dgp = dgp_flags.any_given() || cfg.contains("dgp");
      simbench::DgpSpec spec;
      if (characterizing && !char_trace.empty()) {
        trace = bayesopt::OptimizationTrace::from_csv(io::read_file(char_trace));
        if (have_dgp) spec = dgp_flags.resolve(cfg);
      } else {
        spec = dgp_flags.resolve(cfg);
        have_dgp = true;
        estimators::TrajectoryDataset data;
        if (!characterizing && !opt_data.empty()) {
          data = estimators::read_trajectories(opt_data);
          have_dgp = dgp_flags.any_given() || cfg.contains("dgp");
        } else {
          data = generate_dataset(spec, mix_seed(seed, 0x64676764ULL));
        }
        const auto kind = estimators::estimator_from_string(estimator_name);
        estimators::OutcomeModel model;
        if (kind == estimators::EstimatorKind::gcomp ||
            kind == estimators::EstimatorKind::aipwe) {
          model = estimators::fit_outcome_model(
              data, resolve_recipe(recipe_name, static_cast<int>(data.x_names.size())));
        }
        const bayesopt::Evaluator evaluator = [&](const policy::PolicyParams& theta) {
          const policy::Policy pol{policy::ThresholdPolicy{theta[0], theta[1]}};
          const auto est = estimate_value(data, pol, kind, model);
          return std::make_pair(est.value, est.std_dev);
        };
        trace = bayesopt::optimize_policy(evaluator, box, budget_flags.resolve(cfg),
                                          resolve_gp(cfg), seed);
      }

      if (!characterizing) {
        io::write_file(out_path(out_dir, "trace.csv"), trace.to_csv());
        io::write_file(out_path(out_dir, "trace.json"), trace.to_json().dump(2) + "\n");
        nlohmann::json best;
        best["best_theta"] = {trace.best_theta[0], trace.best_theta[1]};
        best["best_value"] = trace.best_value;
        best["budget_used"] = trace.budget_used;
        std::cout << best.dump() << "\n";
        return 0;
      }

      surface::CharacterizeConfig ccfg;
      ccfg.resolution = char_resolution;
      const auto& gp_cfg = resolve_gp(cfg);
      ccfg.nu = gp_cfg.nu;
      ccfg.tune_restarts = gp_cfg.tune_restarts;
      ccfg.tune_max_evals = gp_cfg.tune_max_evals;
      ccfg.center_targets = gp_cfg.center_targets;
      ccfg.seed = seed;
      std::function<double(const Eigen::VectorXd&)> truth;
      if (have_dgp) {
        truth = [spec](const Eigen::VectorXd& theta) {
          return simbench::oracle_value(spec, policy::ThresholdPolicy{theta[0], theta[1]})
              .value;
        };
      }
      const auto grid = surface::characterize_policy_class(trace.records, box, ccfg, truth);
      surface::export_grid(grid, out_path(out_dir, "surface.csv"),
                           out_path(out_dir, "surface.json"));
      io::write_file(out_path(out_dir, "surface.svg"),
                     surface::render_contour_svg(grid, trace.records, &trace.best_theta));
      nlohmann::json summary;
      summary["n_points"] = grid.points.size();
      if (grid.has_truth) {
        summary["l1"] = grid.l1;
        summary["l2"] = grid.l2;
      }
      std::cout << summary.dump() << "\n";
      return 0;
    }

    if (app.got_subcommand(bench_cmd)) {
      simbench::StudyConfig study;
      study.dgp = bench_dgp.resolve(cfg);
      study.kind = estimators::estimator_from_string(bench_estimator);
      study.recipe = resolve_recipe(bench_recipe, 1);
      study.runs = bench_runs;
      study.budget = bench_budget.resolve(cfg);
      study.gp = resolve_gp(cfg);
      study.n_threads = bench_threads;
      if (cfg.contains("bench")) {
        const auto& j = cfg.at("bench");
        if (!bench_cmd->get_option("--runs")->count()) study.runs = j.value("runs", study.runs);
        if (!bench_cmd->get_option("--threads")->count()) {
          study.n_threads = j.value("threads", study.n_threads);
        }
      }
      const auto summary = simbench::run_study_cell(study, seed);
      io::write_file(out_path(out_dir, "bench.json"), summary.to_json().dump(2) + "\n");
      std::cout << summary.to_json().dump(2) << "\n";
      return 0;
    }

    // Both compliance subcommands share the fit stage.
    const bool valuing = app.got_subcommand(cval_cmd);
    const std::string& data_path = valuing ? cval_data : cfit_data;
    const bool demo = valuing ? cval_demo : cfit_demo;
    const int demo_n = valuing ? cval_n : cfit_n;
    const double prior_scale = valuing ? cval_prior : cfit_prior;
    const McmcFlags& mcmc_flags = valuing ? cval_mcmc : cfit_mcmc;
    if (demo != data_path.empty()) {
      throw ArgumentError("provide exactly one of --data or --demo");
    }
    const compliance::ComplianceDataset data =
        demo ? compliance::generate_pad_like_data(compliance::PadSpec::demo(), demo_n,
                                                  mix_seed(seed, 0x73696d63ULL))
             : compliance::read_compliance(data_path);
    const auto mcmc_cfg = mcmc_flags.resolve(cfg);
    const auto cpost = compliance::fit_compliance_model(data, {}, mcmc_cfg, seed);
    const auto completed = compliance::completed_c1(data, cpost, seed);
    const auto opost =
        compliance::fit_outcome_model_bayes(data, completed, {}, prior_scale, mcmc_cfg, seed);

    if (!valuing) {
      io::write_file(out_path(out_dir, "compliance_draws.csv"), cpost.draws_csv());
      io::write_file(out_path(out_dir, "outcome_draws.csv"), opost.draws_csv());
      nlohmann::json diag;
      diag["compliance"] = cpost.diagnostics_json();
      diag["outcome"] = opost.diagnostics_json();
      io::write_file(out_path(out_dir, "diagnostics.json"), diag.dump(2) + "\n");
      std::cout << diag.dump() << "\n";
      return 0;
    }

    compliance::SimConfig sim_cfg;
    sim_cfg.population_size = cval_population;
    sim_cfg.repeats = cval_repeats;
    sim_cfg.n_value_draws = cval_draws;
    const policy::Policy pol{policy::TwoFeaturePolicy{cval_t1, cval_t2}};
    const auto posterior = compliance::value_posterior(data, pol, cpost, opost, sim_cfg,
                                                       mix_seed(seed, 0x7670737464ULL));
    io::write_file(out_path(out_dir, "value_posterior.json"), posterior.to_json().dump(2) + "\n");
    nlohmann::json summary;
    summary["mean"] = posterior.mean;
    summary["median"] = posterior.median;
    summary["lower95"] = posterior.lower95;
    summary["upper95"] = posterior.upper95;
    std::cout << summary.dump() << "\n";
    return 0;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dtrbo
