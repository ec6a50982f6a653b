#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "dtrbo/errors.hpp"
#include "dtrbo/math/mcmc.hpp"
#include "dtrbo/math/stats.hpp"

using namespace dtrbo;

namespace {

// Independent Gaussian target with per-coordinate means/sds: the chain's
// stationary law is known exactly.
math::McmcResult run_gaussian(const Eigen::VectorXd& mu, const Eigen::VectorXd& sd,
                              const math::McmcConfig& cfg, std::uint64_t seed) {
  const auto target = [&](const Eigen::VectorXd& x) {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double z = (x[i] - mu[i]) / sd[i];
      lp -= 0.5 * z * z;
    }
    return lp;
  };
  return math::run_adaptive_rwm(target, Eigen::VectorXd::Zero(mu.size()), cfg, seed);
}

}  // namespace

TEST_CASE("adaptive RWM recovers a known Gaussian target") {
  Eigen::VectorXd mu(3), sd(3);
  mu << 2.0, -1.0, 0.5;
  sd << 1.0, 0.3, 2.0;
  math::McmcConfig cfg;
  cfg.n_iter = 20000;
  cfg.n_burnin = 10000;
  const auto res = run_gaussian(mu, sd, cfg, 17);
  REQUIRE(res.draws.rows() == 4 * 10000);
  for (int j = 0; j < 3; ++j) {
    const auto col = res.draws.col(j);
    const double m = col.mean();
    const double s = std::sqrt((col.array() - m).square().sum() / (col.size() - 1));
    // The Monte-Carlo error of the mean is sd/√ESS; 5 of those is a safe gate.
    CHECK(std::abs(m - mu[j]) < 5.0 * sd[j] / std::sqrt(res.ess[j]));
    CHECK(s == doctest::Approx(sd[j]).epsilon(0.12));
    CHECK(res.rhat[j] < 1.05);
    CHECK(res.ess[j] > 100.0);
  }
  CHECK(res.accept_rate > 0.15);
  CHECK(res.accept_rate < 0.45);
}

TEST_CASE("scale adaptation copes with badly scaled coordinates") {
  Eigen::VectorXd mu(2), sd(2);
  mu << 0.0, 0.0;
  sd << 1e-3, 50.0;
  math::McmcConfig cfg;
  cfg.n_iter = 20000;
  cfg.n_burnin = 10000;
  const auto res = run_gaussian(mu, sd, cfg, 23);
  for (int j = 0; j < 2; ++j) {
    CHECK(res.rhat[j] < 1.05);
    CHECK(res.ess[j] > 100.0);
  }
  const auto c0 = res.draws.col(0);
  const double s0 = std::sqrt((c0.array() - c0.mean()).square().sum() / (c0.size() - 1));
  CHECK(s0 == doctest::Approx(1e-3).epsilon(0.2));
}

TEST_CASE("init_scale shortens equilibration for known-scale targets") {
  Eigen::VectorXd mu(2), sd(2);
  mu << 1.0, -1.0;
  sd << 0.01, 0.01;
  math::McmcConfig cfg;
  cfg.init_scale = Eigen::VectorXd::Constant(2, 0.01);
  cfg.init_lambda = 1.0;
  const auto res = run_gaussian(mu, sd, cfg, 31);
  CHECK(res.rhat.maxCoeff() < 1.05);
  CHECK(res.ess.minCoeff() > 100.0);
}

TEST_CASE("chains and diagnostics are deterministic in the seed") {
  Eigen::VectorXd mu(2), sd(2);
  mu << 0.3, 0.7;
  sd << 1.0, 1.0;
  math::McmcConfig cfg;
  cfg.n_iter = 600;
  cfg.n_burnin = 300;
  const auto a = run_gaussian(mu, sd, cfg, 5);
  const auto b = run_gaussian(mu, sd, cfg, 5);
  CHECK((a.draws - b.draws).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.rhat == b.rhat);
  const auto c = run_gaussian(mu, sd, cfg, 6);
  CHECK((a.draws - c.draws).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("result layout stacks chains in order") {
  Eigen::VectorXd mu(1), sd(1);
  mu << 0.0;
  sd << 1.0;
  math::McmcConfig cfg;
  cfg.n_iter = 400;
  cfg.n_burnin = 200;
  const auto res = run_gaussian(mu, sd, cfg, 9);
  REQUIRE(res.chains.size() == 4);
  for (int c = 0; c < 4; ++c) {
    CHECK(res.chains[c].rows() == 200);
    CHECK((res.draws.middleRows(c * 200, 200) - res.chains[c]).cwiseAbs().maxCoeff() ==
          0.0);
  }
}

TEST_CASE("configuration and target errors are rejected") {
  const auto flat = [](const Eigen::VectorXd&) { return 0.0; };
  CHECK_THROWS_AS(math::run_adaptive_rwm(flat, Eigen::VectorXd(), {}, 1), ArgumentError);
  math::McmcConfig bad;
  bad.n_chains = 1;
  CHECK_THROWS_AS(math::run_adaptive_rwm(flat, Eigen::VectorXd::Zero(1), bad, 1),
                  ArgumentError);
  bad = {};
  bad.n_burnin = bad.n_iter;  // nothing kept
  CHECK_THROWS_AS(math::run_adaptive_rwm(flat, Eigen::VectorXd::Zero(1), bad, 1),
                  ArgumentError);
  const auto nowhere = [](const Eigen::VectorXd&) {
    return -std::numeric_limits<double>::infinity();
  };
  CHECK_THROWS_AS(math::run_adaptive_rwm(nowhere, Eigen::VectorXd::Zero(1), {}, 1),
                  ArgumentError);
}
