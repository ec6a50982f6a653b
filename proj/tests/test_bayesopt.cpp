#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <dtrbo/bayesopt.hpp>
#include <dtrbo/errors.hpp>
#include <dtrbo/math/normal.hpp>
#include <dtrbo/rng.hpp>

using namespace dtrbo;
using namespace dtrbo::bayesopt;

namespace {

// One training point (x = 0, g = 0) under an exponential kernel with signal
// variance 4/3 and no noise: at x = ln 2 the predictive law is exactly N(0, 1),
// so EI(f_min = z) = z Φ(z) + φ(z).
gp::GpModel unit_predictive_model() {
  gp::KernelSpec spec;
  spec.nu = 0.5;
  spec.signal_variance = 4.0 / 3.0;
  spec.lengthscales = Eigen::VectorXd::Constant(1, 1.0);
  spec.noise_variance = 0.0;
  Eigen::MatrixXd X(1, 1);
  X << 0.0;
  Eigen::VectorXd g(1);
  g << 0.0;
  gp::GpFitConfig cfg;
  cfg.center_targets = false;
  return gp::gp_fit(spec, X, g, Eigen::VectorXd(), cfg);
}

policy::ParamBox unit_box(int d) {
  return policy::ParamBox(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
}

gp::GpModel bowl_model() {
  // Surrogate of g(x) = (x - 0.7)^2 on a coarse grid; minimization surface.
  const int n = 8;
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / (n - 1);
    X(i, 0) = x;
    g(i) = (x - 0.7) * (x - 0.7);
  }
  gp::KernelSpec spec;
  spec.nu = 1.5;
  spec.signal_variance = 0.1;
  spec.lengthscales = Eigen::VectorXd::Constant(1, 0.3);
  spec.noise_variance = 1e-6;
  return gp::gp_fit(spec, X, g);
}

}  // namespace

TEST_CASE("expected improvement matches the closed form") {
  const auto model = unit_predictive_model();
  Eigen::VectorXd q(1);
  q << std::log(2.0);
  // Sanity: the engineered predictive law is standard normal.
  const auto pred = gp::gp_predict(model, q);
  REQUIRE(pred.mean == doctest::Approx(0.0).epsilon(1e-12));
  REQUIRE(pred.variance == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(expected_improvement(model, q, -2.0) ==
        doctest::Approx(0.008490702616829646).epsilon(1e-9));
  CHECK(expected_improvement(model, q, -1.0) ==
        doctest::Approx(0.08331547058768629).epsilon(1e-9));
  CHECK(expected_improvement(model, q, 0.0) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-9));
  CHECK(expected_improvement(model, q, 1.0) ==
        doctest::Approx(1.0833154705876864).epsilon(1e-9));
  CHECK(expected_improvement(model, q, 2.0) ==
        doctest::Approx(2.0084907026168297).epsilon(1e-9));
}

TEST_CASE("expected improvement collapses to the plug-in gap at zero variance") {
  const auto model = unit_predictive_model();
  Eigen::VectorXd at_train(1);
  at_train << 0.0;
  REQUIRE(gp::gp_predict(model, at_train).variance < 1e-12);
  // Below-incumbent mean: improvement equals the gap.
  CHECK(expected_improvement(model, at_train, 0.5) == doctest::Approx(0.5).epsilon(1e-9));
  // At or above the incumbent: no improvement, and never negative.
  CHECK(expected_improvement(model, at_train, 0.0) == 0.0);
  CHECK(expected_improvement(model, at_train, -1.0) == 0.0);
}

TEST_CASE("expected improvement agrees with the predictive law and stays nonnegative") {
  const auto model = bowl_model();
  double f_min = 1e300;
  for (Eigen::Index i = 0; i < model.train_targets.size(); ++i) {
    f_min = std::min(f_min, model.train_targets(i));
  }
  Rng rng(808);
  for (int t = 0; t < 2000; ++t) {
    Eigen::VectorXd q(1);
    q << rng.uniform(-0.3, 1.3);
    const double ei = expected_improvement(model, q, f_min);
    CHECK(ei >= 0.0);
    CHECK(std::isfinite(ei));
    const auto pred = gp::gp_predict(model, q);
    const double sigma = std::sqrt(pred.variance);
    double ref;
    if (sigma < 1e-12) {
      ref = std::max(f_min - pred.mean, 0.0);
    } else {
      const double z = (f_min - pred.mean) / sigma;
      ref = (f_min - pred.mean) * math::norm_cdf(z) + sigma * math::norm_pdf(z);
    }
    CHECK(ei == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("maximize_ei returns an in-box near-maximizer deterministically") {
  const auto model = bowl_model();
  const auto box = unit_box(1);
  const double f_min = 0.0016;  // slightly above the best training value

  const auto best = maximize_ei(model, box, f_min, 17);
  REQUIRE(best.size() == 1);
  CHECK(box.contains(best));
  const double best_ei = expected_improvement(model, best, f_min);

  Rng rng(2718);
  double probe_max = 0.0;
  for (int t = 0; t < 1000; ++t) {
    Eigen::VectorXd q(1);
    q << rng.uniform();
    probe_max = std::max(probe_max, expected_improvement(model, q, f_min));
  }
  CHECK(best_ei >= probe_max - 1e-9);

  const auto again = maximize_ei(model, box, f_min, 17);
  CHECK(best == again);
}

TEST_CASE("space-filling design stays in the box and is seed-deterministic") {
  Eigen::VectorXd lo(2), hi(2);
  lo << -1.0, 2.0;
  hi << 1.0, 6.0;
  const policy::ParamBox box(lo, hi);
  const auto pts = space_filling_design(box, 20, 3);
  REQUIRE(pts.size() == 20);
  for (const auto& p : pts) CHECK(box.contains(p));
  const auto same = space_filling_design(box, 20, 3);
  const auto other = space_filling_design(box, 20, 4);
  CHECK(pts == same);
  CHECK(pts != other);
}

TEST_CASE("optimize_policy finds a smooth bowl optimum") {
  const auto box = unit_box(2);
  Evaluator eval = [](const policy::PolicyParams& theta) {
    const double v =
        1.0 - (theta(0) - 0.6) * (theta(0) - 0.6) - (theta(1) - 0.4) * (theta(1) - 0.4);
    return std::make_pair(v, 0.0);
  };
  Budget budget;
  budget.n_initial = 10;
  budget.n_ei = 20;
  const auto trace = optimize_policy(eval, box, budget, GpConfig{}, 12345);

  REQUIRE(!trace.records.empty());
  CHECK(trace.budget_used == static_cast<int>(trace.records.size()));
  CHECK(trace.budget_used <= budget.n_initial + budget.n_ei);
  for (int i = 0; i < budget.n_initial; ++i) {
    CHECK(trace.records[static_cast<std::size_t>(i)].source == "initial-design");
  }
  for (std::size_t i = static_cast<std::size_t>(budget.n_initial); i < trace.records.size();
       ++i) {
    CHECK(trace.records[i].source == "ei-step");
  }
  CHECK((trace.best_theta - Eigen::Vector2d(0.6, 0.4)).norm() < 0.15);
  double max_value = trace.records.front().value;
  for (const auto& r : trace.records) max_value = std::max(max_value, r.value);
  CHECK(trace.best_value == max_value);
  CHECK(trace.param_names == std::vector<std::string>{"theta1", "theta2"});
}

TEST_CASE("optimize_policy is deterministic given the seed") {
  const auto box = unit_box(1);
  Evaluator eval = [](const policy::PolicyParams& theta) {
    return std::make_pair(std::sin(5.0 * theta(0)), 0.05);
  };
  Budget budget;
  budget.n_initial = 6;
  budget.n_ei = 6;
  const auto a = optimize_policy(eval, box, budget, GpConfig{}, 9);
  const auto b = optimize_policy(eval, box, budget, GpConfig{}, 9);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].theta == b.records[i].theta);
    CHECK(a.records[i].value == b.records[i].value);
    CHECK(a.records[i].source == b.records[i].source);
  }
  CHECK(a.best_theta == b.best_theta);
}

TEST_CASE("the EI threshold is checked before spending an evaluation") {
  const auto box = unit_box(1);
  Evaluator eval = [](const policy::PolicyParams&) { return std::make_pair(2.5, 0.0); };
  Budget budget;
  budget.n_initial = 6;
  budget.n_ei = 10;
  // An unreachably high threshold halts the loop right after the design.
  budget.ei_stop_threshold = 1e9;
  const auto trace = optimize_policy(eval, box, budget, GpConfig{}, 31);
  CHECK(trace.budget_used == budget.n_initial);
  CHECK(static_cast<int>(trace.records.size()) == budget.n_initial);
  CHECK(trace.best_value == 2.5);
  // Ties keep the earliest evaluation.
  CHECK(trace.best_theta == trace.records.front().theta);

  // The acquisition never vanishes on a tuned surrogate of constant data, so
  // the default threshold lets the loop spend its whole budget.
  budget.ei_stop_threshold = 1e-6;
  const auto full = optimize_policy(eval, box, budget, GpConfig{}, 31);
  CHECK(full.budget_used <= budget.n_initial + budget.n_ei);
  CHECK(full.best_value == 2.5);
  CHECK(full.best_theta == full.records.front().theta);
}

TEST_CASE("evaluator failures carry the partial trace") {
  const auto box = unit_box(1);
  int calls = 0;
  Evaluator eval = [&calls](const policy::PolicyParams& theta) {
    if (++calls == 5) throw std::runtime_error("backend went away");
    return std::make_pair(theta(0), 0.0);
  };
  Budget budget;
  budget.n_initial = 8;
  budget.n_ei = 0;
  try {
    optimize_policy(eval, box, budget, GpConfig{}, 100);
    FAIL("expected EvaluatorFailure");
  } catch (const EvaluatorFailure& e) {
    CHECK(e.partial_trace.records.size() == 4);
    CHECK(std::string(e.what()).find("backend went away") != std::string::npos);
  }
}

TEST_CASE("optimize_policy validates its budget") {
  const auto box = unit_box(1);
  Evaluator eval = [](const policy::PolicyParams&) { return std::make_pair(0.0, 0.0); };
  Budget bad;
  bad.n_initial = 0;
  CHECK_THROWS_AS(optimize_policy(eval, box, bad, GpConfig{}, 1), ArgumentError);
  Budget neg;
  neg.n_ei = -1;
  CHECK_THROWS_AS(optimize_policy(eval, box, neg, GpConfig{}, 1), ArgumentError);
}

TEST_CASE("trace csv round-trip preserves records bit for bit") {
  OptimizationTrace trace;
  trace.param_names = {"theta1", "theta2"};
  Rng rng(66);
  for (int i = 0; i < 12; ++i) {
    EvaluationRecord r;
    r.theta = Eigen::Vector2d(rng.uniform(), rng.uniform());
    r.value = rng.normal();
    r.std_dev = std::abs(rng.normal());
    r.source = i < 8 ? "initial-design" : "ei-step";
    trace.records.push_back(r);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    if (trace.records[i].value > trace.records[best].value) best = i;
  }
  trace.best_theta = trace.records[best].theta;
  trace.best_value = trace.records[best].value;
  trace.budget_used = 12;

  const std::string csv = trace.to_csv();
  const auto back = OptimizationTrace::from_csv(csv);
  REQUIRE(back.records.size() == trace.records.size());
  CHECK(back.param_names == trace.param_names);
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    CHECK(back.records[i].theta == trace.records[i].theta);
    CHECK(back.records[i].value == trace.records[i].value);
    CHECK(back.records[i].std_dev == trace.records[i].std_dev);
    CHECK(back.records[i].source == trace.records[i].source);
  }
  CHECK(back.best_value == trace.best_value);
  CHECK(back.best_theta == trace.best_theta);
  CHECK(back.budget_used == trace.budget_used);
  // Serializing again reproduces the exact text.
  CHECK(back.to_csv() == csv);

  const auto j = trace.to_json();
  CHECK(j.contains("records"));
  CHECK(j.contains("best_theta"));
  CHECK(j.contains("best_value"));
  CHECK(j.contains("budget_used"));
  CHECK(j["records"].size() == 12);
}

TEST_CASE("trace csv parsing rejects malformed headers") {
  CHECK_THROWS_AS(OptimizationTrace::from_csv("a,b\n1,2\n"), ArgumentError);
}
