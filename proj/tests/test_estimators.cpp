#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <dtrbo/errors.hpp>
#include <dtrbo/estimators.hpp>
#include <dtrbo/math/stats.hpp>
#include <dtrbo/rng.hpp>
#include <dtrbo/simbench.hpp>
#include <filesystem>
#include <string>

using namespace dtrbo;
using namespace dtrbo::estimators;

namespace {

Trajectory rec(double x, int a, double y, double p) {
  Trajectory t;
  t.x = Eigen::VectorXd::Constant(1, x);
  t.a = a;
  t.y = y;
  t.propensity = p;
  return t;
}

// Four records worked through by hand; the policy treats x < 0 or x > 0.5,
// so decisions are {0, 1, 1, 0}.
TrajectoryDataset hand_dataset() {
  TrajectoryDataset d;
  d.x_names = {"x"};
  d.records = {rec(0.2, 0, 1.0, 0.6), rec(0.7, 1, 2.0, 0.5), rec(0.9, 0, 3.0, 0.4),
               rec(0.4, 0, 0.5, 0.7)};
  return d;
}

policy::Policy hand_policy() { return policy::ThresholdPolicy{0.0, 0.5}; }

}  // namespace

TEST_CASE("ipw matches a hand computation") {
  const auto est = ipw_value(hand_dataset(), hand_policy());
  // terms: 1/0.6, 2/0.5, 0 (record 3 inconsistent), 0.5/0.7
  CHECK(est.value == doctest::Approx(1.5952380952380953).epsilon(1e-14));
  CHECK(est.std_dev == doctest::Approx(0.8712464030253327).epsilon(1e-12));
}

TEST_CASE("sipw matches a hand computation") {
  const auto est = sipw_value(hand_dataset(), hand_policy());
  CHECK(est.value == doctest::Approx(1.2523364485981308).epsilon(1e-14));
  CHECK(est.std_dev == doctest::Approx(0.42807231181587935).epsilon(1e-12));
}

TEST_CASE("sipw is location equivariant, ipw is not") {
  auto data = hand_dataset();
  const auto pol = hand_policy();
  const double base_sipw = sipw_value(data, pol).value;
  const double base_ipw = ipw_value(data, pol).value;
  const double shift = 7.25;
  for (auto& t : data.records) t.y += shift;
  CHECK(sipw_value(data, pol).value == doctest::Approx(base_sipw + shift).epsilon(1e-12));
  // Hájek moves by exactly the shift; Horvitz–Thompson moves by shift ×
  // (mean weight), which differs from the shift unless weights average to 1.
  CHECK(std::abs(ipw_value(data, pol).value - (base_ipw + shift)) > 0.1);
  // The SE is invariant to the shift for both.
  CHECK(sipw_value(data, pol).std_dev == doctest::Approx(0.42807231181587935).epsilon(1e-10));
}

TEST_CASE("aipwe with the zero outcome model reduces to ipw exactly") {
  const auto data = hand_dataset();
  const auto pol = hand_policy();
  const auto zero = OutcomeModel::zero(OutcomeRecipe::additive(1));
  const auto a = aipwe_value(data, pol, zero);
  const auto b = ipw_value(data, pol);
  CHECK(a.value == b.value);
  CHECK(a.std_dev == b.std_dev);
}

TEST_CASE("sipw throws when no unit is policy-consistent") {
  TrajectoryDataset d;
  d.x_names = {"x"};
  // Policy treats everyone with x > 0.5; all records are untreated there.
  d.records = {rec(0.7, 0, 1.0, 0.5), rec(0.9, 0, 2.0, 0.5)};
  CHECK_THROWS_AS(sipw_value(d, hand_policy()), EstimationError);
  // IPW degrades to zero instead of throwing.
  CHECK(ipw_value(d, hand_policy()).value == 0.0);
}

TEST_CASE("empty datasets are rejected") {
  TrajectoryDataset d;
  d.x_names = {"x"};
  const auto pol = hand_policy();
  CHECK_THROWS_AS(ipw_value(d, pol), ArgumentError);
  CHECK_THROWS_AS(sipw_value(d, pol), ArgumentError);
  const auto zero = OutcomeModel::zero(OutcomeRecipe::additive(1));
  CHECK_THROWS_AS(gcomp_value(d, pol, zero), ArgumentError);
  CHECK_THROWS_AS(aipwe_value(d, pol, zero), ArgumentError);
  CHECK_THROWS_AS(fit_outcome_model(d, OutcomeRecipe::additive(1)), ArgumentError);
}

TEST_CASE("outcome recipe layouts") {
  const auto add = OutcomeRecipe::additive(2);
  REQUIRE(add.terms.size() == 4);
  Eigen::VectorXd x(2);
  x << 3.0, 5.0;
  Eigen::VectorXd f1 = add.features(x, 1);
  REQUIRE(f1.size() == 4);
  CHECK(f1(0) == 1.0);
  CHECK(f1(1) == 3.0);
  CHECK(f1(2) == 5.0);
  CHECK(f1(3) == 1.0);
  Eigen::VectorXd f0 = add.features(x, 0);
  CHECK(f0(3) == 0.0);

  const auto inter = OutcomeRecipe::interacted(2);
  REQUIRE(inter.terms.size() == 6);
  Eigen::VectorXd g = inter.features(x, 1);
  CHECK(g(4) == 3.0);
  CHECK(g(5) == 5.0);
  CHECK(inter.features(x, 0)(4) == 0.0);

  // Out-of-range covariate index is flagged at evaluation time.
  OutcomeRecipe bad;
  bad.terms.push_back({5, false});
  CHECK_THROWS_AS(bad.features(x, 0), ArgumentError);
}

TEST_CASE("least squares recovers an exactly linear outcome") {
  TrajectoryDataset d;
  d.x_names = {"x"};
  Rng rng(99);
  for (int i = 0; i < 50; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    const int a = rng.bernoulli(0.5) ? 1 : 0;
    d.records.push_back(rec(x, a, 2.0 - 0.5 * x + 1.5 * a, 0.5));
  }
  const auto model = fit_outcome_model(d, OutcomeRecipe::additive(1));
  REQUIRE(model.coef.size() == 3);
  CHECK(model.coef(0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(model.coef(1) == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(model.coef(2) == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(model.predict(Eigen::VectorXd::Constant(1, 0.3), 1) ==
        doctest::Approx(2.0 - 0.15 + 1.5).epsilon(1e-9));
}

TEST_CASE("singular designs fall back to a finite ridge solution") {
  TrajectoryDataset d;
  d.x_names = {"x"};
  // Every unit treated: the action column duplicates the intercept.
  for (int i = 0; i < 10; ++i) d.records.push_back(rec(0.1 * i, 1, 1.0 + 0.1 * i, 0.5));
  const auto model = fit_outcome_model(d, OutcomeRecipe::additive(1));
  CHECK(model.coef.allFinite());
  // Fitted values still reproduce the observed outcomes.
  for (const auto& t : d.records) {
    CHECK(model.predict(t.x, t.a) == doctest::Approx(t.y).epsilon(1e-5));
  }
}

TEST_CASE("additive g-computation misses the treatment-region integral") {
  // With τ(x) = cos(2πx) and X uniform on (0,1), the additive basis {1, x, a}
  // projects the effect to zero: E τ = 0 and cov(τ(X), X) = 0. The plug-in
  // value is then γ0 + γ1/2 for every policy, so for the policy treating
  // x < 1/4 it sits 1/(2π) below the truth.
  simbench::DgpSpec spec;
  spec.setting = 2;
  spec.w = 1.0;
  spec.n = 20000;
  const auto data = simbench::generate_dataset(spec, 31);
  const auto model = fit_outcome_model(data, OutcomeRecipe::additive(1));
  const policy::ThresholdPolicy treat_low{0.25, 1.0};
  const auto est = gcomp_value(data, policy::Policy(treat_low), model);
  const double truth = simbench::oracle_value(spec, treat_low).value;
  CHECK(truth == doctest::Approx(0.5 + 1.0 / (2.0 * M_PI)).epsilon(1e-12));
  CHECK(est.value - truth == doctest::Approx(-1.0 / (2.0 * M_PI)).epsilon(0.2));
  // The interacted basis spans the truth up to sampling noise in the
  // projection of cos onto {x, ax}; it must beat the additive one clearly.
  const auto inter = fit_outcome_model(data, OutcomeRecipe::interacted(1));
  const auto est2 = gcomp_value(data, policy::Policy(treat_low), inter);
  CHECK(std::abs(est2.value - truth) < std::abs(est.value - truth));
}

TEST_CASE("trajectory csv round-trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dtrbo_est_test";
  fs::create_directories(dir);
  const std::string path = (dir / "traj.csv").string();

  TrajectoryDataset d;
  d.x_names = {"x"};
  Rng rng(123);
  for (int i = 0; i < 20; ++i) {
    d.records.push_back(rec(rng.uniform(), rng.bernoulli(0.5) ? 1 : 0, rng.normal(),
                            rng.uniform(0.1, 0.9)));
  }
  write_trajectories(path, d);
  const auto back = read_trajectories(path);
  REQUIRE(back.records.size() == d.records.size());
  REQUIRE(back.x_names == d.x_names);
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    CHECK(back.records[i].x(0) == d.records[i].x(0));
    CHECK(back.records[i].a == d.records[i].a);
    CHECK(back.records[i].y == d.records[i].y);
    CHECK(back.records[i].propensity == d.records[i].propensity);
  }
  fs::remove_all(dir);
}

TEST_CASE("trajectory csv validation") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dtrbo_est_bad";
  fs::create_directories(dir);
  auto write = [&](const char* name, const char* body) {
    const std::string p = (dir / name).string();
    std::FILE* f = std::fopen(p.c_str(), "wb");
    REQUIRE(f != nullptr);
    std::fputs(body, f);
    std::fclose(f);
    return p;
  };
  // Missing propensity column.
  const auto p1 = write("m.csv", "x,a,y\n0.5,1,2.0\n");
  CHECK_THROWS_AS(read_trajectories(p1), ArgumentError);
  // Action outside {0, 1}.
  const auto p2 = write("a.csv", "x,a,y,propensity\n0.5,2,2.0,0.5\n");
  CHECK_THROWS_AS(read_trajectories(p2), ArgumentError);
  // Propensity on the boundary.
  const auto p3 = write("p.csv", "x,a,y,propensity\n0.5,1,2.0,1.0\n");
  CHECK_THROWS_AS(read_trajectories(p3), ArgumentError);
  // No covariate columns ahead of the action.
  const auto p4 = write("c.csv", "a,y,propensity\n1,2.0,0.5\n");
  CHECK_THROWS_AS(read_trajectories(p4), ArgumentError);
  fs::remove_all(dir);
}

TEST_CASE("estimator names round-trip") {
  for (auto kind : {EstimatorKind::ipw, EstimatorKind::sipw, EstimatorKind::gcomp,
                    EstimatorKind::aipwe}) {
    CHECK(estimator_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(estimator_from_string("dr"), ArgumentError);
}

TEST_CASE("bootstrap draws are deterministic and track the analytic spread") {
  simbench::DgpSpec spec;
  spec.setting = 2;
  spec.n = 400;
  const auto data = simbench::generate_dataset(spec, 5);
  const auto pol = hand_policy();
  const auto recipe = OutcomeRecipe::additive(1);

  Rng r1(42), r2(42), r3(43);
  const auto d1 = value_draws(data, pol, EstimatorKind::ipw, recipe, 200, r1);
  const auto d2 = value_draws(data, pol, EstimatorKind::ipw, recipe, 200, r2);
  const auto d3 = value_draws(data, pol, EstimatorKind::ipw, recipe, 200, r3);
  CHECK(d1 == d2);
  CHECK(d1 != d3);

  const auto analytic = ipw_value(data, pol);
  CHECK(math::mean(d1) == doctest::Approx(analytic.value).epsilon(0.25));
  const double boot_sd = math::sample_sd(d1);
  CHECK(boot_sd > 0.5 * analytic.std_dev);
  CHECK(boot_sd < 2.0 * analytic.std_dev);

  Rng r4(7);
  CHECK_THROWS_AS(value_draws(data, pol, EstimatorKind::ipw, recipe, 1, r4), ArgumentError);
}

TEST_CASE("bootstrap refits the outcome model per resample") {
  // gcomp draws must vary across resamples even though the point estimate of a
  // fixed model would not.
  simbench::DgpSpec spec;
  spec.setting = 3;
  spec.n = 150;
  const auto data = simbench::generate_dataset(spec, 9);
  Rng rng(11);
  const auto draws = value_draws(data, hand_policy(), EstimatorKind::gcomp,
                                 OutcomeRecipe::additive(1), 50, rng);
  CHECK(math::sample_sd(draws) > 0.0);
}
