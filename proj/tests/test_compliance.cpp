#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <dtrbo/compliance.hpp>
#include <dtrbo/errors.hpp>
#include <dtrbo/io/csv.hpp>
#include <dtrbo/math/stats.hpp>
#include <dtrbo/rng.hpp>
#include <filesystem>
#include <string>

using namespace dtrbo;
using namespace dtrbo::compliance;

namespace {

const ComplianceDataset& demo_data() {
  static const ComplianceDataset data = generate_pad_like_data(PadSpec::demo(), 500, 3);
  return data;
}

// Shared fitted posteriors: the two MCMC fits dominate this binary's runtime,
// so every test case reuses them.
const TruncNormPosterior& demo_compliance_post() {
  static const TruncNormPosterior post =
      fit_compliance_model(demo_data(), H1Recipe{}, math::McmcConfig{}, 21);
  return post;
}

const LogitPosterior& demo_outcome_post() {
  static const LogitPosterior post = [] {
    const auto c1 = completed_c1(demo_data(), demo_compliance_post(), 77);
    return fit_outcome_model_bayes(demo_data(), c1, OutcomeBayesRecipe{}, 3.0,
                                   math::McmcConfig{}, 22);
  }();
  return post;
}

policy::Policy treat_large_wounds() { return policy::TwoFeaturePolicy{0.5, 60.0}; }

}  // namespace

TEST_CASE("pad-like generator shapes and invariants") {
  const auto& data = demo_data();
  REQUIRE(data.records.size() == 500);
  CHECK(data.x0_names == std::vector<std::string>{"w0", "z0"});
  CHECK(data.x1_names == std::vector<std::string>{"z1"});
  int treated = 0;
  for (const auto& t : data.records) {
    CHECK(t.x0.size() == 2);
    CHECK(t.x1.size() == 1);
    CHECK(t.x0(0) >= 5.0);
    CHECK(t.x0(0) <= 95.0);
    CHECK(t.c0 >= 0.0);
    CHECK(t.c0 <= 1.0);
    CHECK(t.c1 >= 0.0);
    CHECK(t.c1 <= 1.0);
    CHECK((t.y == 0.0 || t.y == 1.0));
    if (t.a1 == 1) {
      ++treated;
      CHECK(t.c1 == 1.0);  // realized compliance under assignment
    }
  }
  // Both arms well populated under the demo design.
  CHECK(treated > 100);
  CHECK(treated < 400);

  const auto same = generate_pad_like_data(PadSpec::demo(), 500, 3);
  CHECK(same.records[17].y == data.records[17].y);
  CHECK(same.records[17].x0 == data.records[17].x0);
  const auto other = generate_pad_like_data(PadSpec::demo(), 500, 4);
  bool any_diff = false;
  for (std::size_t i = 0; i < 500 && !any_diff; ++i) {
    any_diff = other.records[i].x0 != data.records[i].x0;
  }
  CHECK(any_diff);
}

TEST_CASE("pad spec validation") {
  auto spec = PadSpec::demo();
  spec.compliance_beta = Eigen::VectorXd::Zero(4);  // wrong width
  CHECK_THROWS_AS(generate_pad_like_data(spec, 10, 1), ArgumentError);
  auto spec2 = PadSpec::demo();
  spec2.compliance_sigma = 0.0;
  CHECK_THROWS_AS(generate_pad_like_data(spec2, 10, 1), ArgumentError);
  auto spec3 = PadSpec::demo();
  spec3.wound_lo = -1.0;
  CHECK_THROWS_AS(generate_pad_like_data(spec3, 10, 1), ArgumentError);
  CHECK_THROWS_AS(generate_pad_like_data(PadSpec::demo(), 0, 1), ArgumentError);
}

TEST_CASE("h1 covariates expose named history features") {
  const auto& data = demo_data();
  const auto& t = data.records[0];
  const auto c = data.h1_covariates(t);
  CHECK(c.get("w0") == t.x0(0));
  CHECK(c.get("z0") == t.x0(1));
  CHECK(c.get("c0") == t.c0);
  CHECK(c.get("z1") == t.x1(0));
  CHECK_THROWS_AS(c.get("nope"), ArgumentError);
}

TEST_CASE("recipe feature layouts") {
  const auto& data = demo_data();
  const auto& t = data.records[0];

  H1Recipe h1;
  REQUIRE(h1.size(data) == 5);
  const auto f = h1.features(t);
  REQUIRE(f.size() == 5);
  CHECK(f(0) == 1.0);
  CHECK(f(1) == t.x0(0));
  CHECK(f(2) == t.x0(1));
  CHECK(f(3) == t.c0);
  CHECK(f(4) == t.x1(0));

  OutcomeBayesRecipe full;
  REQUIRE(full.size(data) == 8);
  const auto g = full.features(t, 0.6, 1);
  REQUIRE(g.size() == 8);
  CHECK(g.head(5) == f);
  CHECK(g(5) == 0.6);
  CHECK(g(6) == 1.0);
  CHECK(g(7) == 0.6);  // a1 * c1

  OutcomeBayesRecipe plain;
  plain.interaction = false;
  REQUIRE(plain.size(data) == 7);
  const auto g0 = plain.features(t, 0.6, 0);
  CHECK(g0(5) == 0.6);
  CHECK(g0(6) == 0.0);
}

TEST_CASE("compliance csv round-trip blanks the treated stratum") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dtrbo_comp_csv";
  fs::create_directories(dir);
  const std::string path = (dir / "pad.csv").string();

  const auto& data = demo_data();
  write_compliance(path, data);

  // The raw text must contain a blank c1 field for treated records.
  const std::string text = io::read_file(path);
  CHECK(text.find(",1,,") != std::string::npos);

  const auto back = read_compliance(path);
  REQUIRE(back.records.size() == data.records.size());
  CHECK(back.x0_names == data.x0_names);
  CHECK(back.x1_names == data.x1_names);
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    CHECK(back.records[i].x0 == data.records[i].x0);
    CHECK(back.records[i].c0 == data.records[i].c0);
    CHECK(back.records[i].x1 == data.records[i].x1);
    CHECK(back.records[i].a1 == data.records[i].a1);
    CHECK(back.records[i].c1 == data.records[i].c1);
    CHECK(back.records[i].y == data.records[i].y);
  }
  fs::remove_all(dir);
}

TEST_CASE("compliance csv validation") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dtrbo_comp_bad";
  fs::create_directories(dir);
  auto write = [&](const char* name, const std::string& body) {
    const std::string p = (dir / name).string();
    io::write_file(p, body);
    return p;
  };
  const std::string header = "w0,z0,c0,z1,a1,c1,y\n";
  // Missing required column.
  CHECK_THROWS_AS(read_compliance(write("h.csv", "w0,c0,a1,y\n1,0.5,0,1\n")), ArgumentError);
  // Treated record with a non-blank stratum.
  CHECK_THROWS_AS(read_compliance(write("t.csv", header + "50,0,0.5,0,1,0.7,1\n")),
                  ArgumentError);
  // Compliance outside [0, 1].
  CHECK_THROWS_AS(read_compliance(write("c.csv", header + "50,0,1.5,0,0,0.7,1\n")),
                  ArgumentError);
  // Action outside {0, 1}.
  CHECK_THROWS_AS(read_compliance(write("a.csv", header + "50,0,0.5,0,2,,1\n")),
                  ArgumentError);
  // A valid untreated row parses.
  const auto ok = read_compliance(write("ok.csv", header + "50,0.1,0.5,-0.2,0,0.7,1\n"));
  REQUIRE(ok.records.size() == 1);
  CHECK(ok.records[0].c1 == 0.7);
  fs::remove_all(dir);
}

TEST_CASE("compliance fit passes its convergence gates on demo data") {
  const auto& post = demo_compliance_post();
  REQUIRE(post.beta_draws.cols() == 5);
  CHECK(post.beta_draws.rows() == post.sigma_draws.size());
  CHECK(post.beta_draws.rows() == 4 * 2500);  // chains x kept iterations
  REQUIRE(post.rhat.size() == 6);             // beta... plus log sigma
  for (Eigen::Index i = 0; i < post.rhat.size(); ++i) {
    CHECK(post.rhat(i) <= 1.05);
    CHECK(post.ess(i) >= 100.0);
  }
  CHECK(post.accept_rate > 0.1);
  CHECK(post.accept_rate < 0.5);
  CHECK((post.sigma_draws.array() > 0.0).all());

  const auto j = post.diagnostics_json();
  CHECK(j.contains("rhat"));
  CHECK(j.contains("ess"));
  CHECK(j.contains("accept_rate"));

  // Draw CSV: one beta column per predictor plus the scale.
  const std::string csv = post.draws_csv();
  CHECK(csv.rfind("beta0,beta1,beta2,beta3,beta4,sigma\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + post.beta_draws.rows());
}

TEST_CASE("outcome fit passes its gates and flags nothing on demo data") {
  const auto& post = demo_outcome_post();
  REQUIRE(post.beta_draws.cols() == 8);
  for (Eigen::Index i = 0; i < post.rhat.size(); ++i) {
    CHECK(post.rhat(i) <= 1.05);
    CHECK(post.ess(i) >= 100.0);
  }
  CHECK_FALSE(post.separation_warning);
  const std::string csv = post.draws_csv();
  CHECK(csv.rfind("beta0,beta1,beta2,beta3,beta4,beta5,beta6,beta7\n", 0) == 0);
}

TEST_CASE("fit rejects degenerate inputs") {
  // Too few untreated records.
  auto small = generate_pad_like_data(PadSpec::demo(), 40, 8);
  small.records.erase(
      std::remove_if(small.records.begin(), small.records.end(),
                     [](const ComplianceTrajectory& t) { return t.a1 == 0; }),
      small.records.end());
  CHECK_THROWS_AS(fit_compliance_model(small, H1Recipe{}, math::McmcConfig{}, 1),
                  ArgumentError);

  // Duplicated predictor makes the H1 design rank-deficient.
  auto dup = demo_data();
  for (auto& t : dup.records) t.x1(0) = t.c0;
  CHECK_THROWS_AS(fit_compliance_model(dup, H1Recipe{}, math::McmcConfig{}, 1),
                  ArgumentError);

  // Outcome fit: completion must cover the records and classes must be mixed.
  const auto& data = demo_data();
  std::vector<double> short_c1(data.records.size() - 1, 0.5);
  CHECK_THROWS_AS(fit_outcome_model_bayes(data, short_c1, OutcomeBayesRecipe{}, 3.0,
                                          math::McmcConfig{}, 1),
                  ArgumentError);
  std::vector<double> c1(data.records.size(), 0.5);
  CHECK_THROWS_AS(fit_outcome_model_bayes(data, c1, OutcomeBayesRecipe{}, 0.0,
                                          math::McmcConfig{}, 1),
                  ArgumentError);
  auto one_class = data;
  for (auto& t : one_class.records) t.y = 1.0;
  CHECK_THROWS_AS(fit_outcome_model_bayes(one_class, c1, OutcomeBayesRecipe{}, 3.0,
                                          math::McmcConfig{}, 1),
                  ArgumentError);
  std::vector<double> bad_c1(data.records.size(), 1.5);
  CHECK_THROWS_AS(fit_outcome_model_bayes(data, bad_c1, OutcomeBayesRecipe{}, 3.0,
                                          math::McmcConfig{}, 1),
                  ArgumentError);
}

TEST_CASE("imputation draws live in the unit interval and respect the seed") {
  const auto& data = demo_data();
  const auto& post = demo_compliance_post();
  const ComplianceTrajectory* treated = nullptr;
  const ComplianceTrajectory* untreated = nullptr;
  for (const auto& t : data.records) {
    if (t.a1 == 1 && !treated) treated = &t;
    if (t.a1 == 0 && !untreated) untreated = &t;
  }
  REQUIRE(treated != nullptr);
  REQUIRE(untreated != nullptr);

  for (std::uint64_t s = 0; s < 50; ++s) {
    const double v = impute_c1(post, data, *treated, s);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(impute_c1(post, data, *treated, 5) == impute_c1(post, data, *treated, 5));
  CHECK(impute_c1(post, data, *treated, 5) != impute_c1(post, data, *treated, 6));
  // Observed strata are never imputed.
  CHECK_THROWS_AS(impute_c1(post, data, *untreated, 1), ArgumentError);
}

TEST_CASE("completion keeps observed strata and fills the rest") {
  const auto& data = demo_data();
  const auto& post = demo_compliance_post();
  const auto c1 = completed_c1(data, post, 99);
  REQUIRE(c1.size() == data.records.size());
  for (std::size_t i = 0; i < c1.size(); ++i) {
    if (data.records[i].a1 == 0) {
      CHECK(c1[i] == data.records[i].c1);
    } else {
      CHECK(c1[i] >= 0.0);
      CHECK(c1[i] <= 1.0);
    }
  }
  CHECK(completed_c1(data, post, 99) == c1);
  CHECK(completed_c1(data, post, 100) != c1);
}

TEST_CASE("value draws shrink like one over root population size") {
  const auto& data = demo_data();
  const auto& cpost = demo_compliance_post();
  const auto& opost = demo_outcome_post();
  const auto pol = treat_large_wounds();

  auto spread = [&](int m, std::uint64_t tag) {
    SimConfig sim;
    sim.population_size = m;
    std::vector<double> draws(120);
    for (std::size_t i = 0; i < draws.size(); ++i) {
      draws[i] = value_draw(data, pol, cpost, opost, sim, mix_seed(tag, i));
    }
    for (double v : draws) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    return math::sample_sd(draws);
  };
  const double sd_small = spread(800, 1);
  const double sd_large = spread(3200, 2);
  const double ratio = sd_small / sd_large;
  CHECK(ratio > 1.5);
  CHECK(ratio < 2.6);

  SimConfig sim;
  CHECK(value_draw(data, pol, cpost, opost, sim, 7) ==
        value_draw(data, pol, cpost, opost, sim, 7));
  SimConfig bad;
  bad.population_size = 0;
  CHECK_THROWS_AS(value_draw(data, pol, cpost, opost, bad, 7), ArgumentError);
}

TEST_CASE("value posterior summarizes its draws coherently") {
  const auto& data = demo_data();
  const auto& cpost = demo_compliance_post();
  const auto& opost = demo_outcome_post();
  const auto pol = treat_large_wounds();

  SimConfig sim;
  sim.population_size = 600;
  sim.repeats = 2;
  sim.n_value_draws = 12;
  const auto vp = value_posterior(data, pol, cpost, opost, sim, 5);
  REQUIRE(vp.draws.size() == 12);
  CHECK(vp.mean == doctest::Approx(math::mean(vp.draws)).epsilon(1e-12));
  auto sorted = vp.draws;
  std::sort(sorted.begin(), sorted.end());
  CHECK(vp.lower95 <= vp.median);
  CHECK(vp.median <= vp.upper95);
  CHECK(vp.lower95 >= sorted.front() - 1e-12);
  CHECK(vp.upper95 <= sorted.back() + 1e-12);
  CHECK(vp.mean > 0.0);
  CHECK(vp.mean < 1.0);

  const auto again = value_posterior(data, pol, cpost, opost, sim, 5);
  CHECK(again.draws == vp.draws);

  const auto j = vp.to_json();
  CHECK(j.contains("draws"));
  CHECK(j.contains("mean"));
  CHECK(j.contains("lower95"));

  SimConfig bad = sim;
  bad.n_value_draws = 1;
  CHECK_THROWS_AS(value_posterior(data, pol, cpost, opost, bad, 5), ArgumentError);
  SimConfig bad2 = sim;
  bad2.repeats = 0;
  CHECK_THROWS_AS(value_posterior(data, pol, cpost, opost, bad2, 5), ArgumentError);
}

TEST_CASE("forward oracle is deterministic and orders demo regimes sensibly") {
  const auto spec = PadSpec::demo();
  const policy::Policy treat_all(policy::TwoFeaturePolicy{2.0, 0.0});
  const policy::Policy treat_none(policy::TwoFeaturePolicy{-1.0, 200.0});
  const double v_all = forward_policy_value(spec, treat_all, 40000, 11);
  const double v_none = forward_policy_value(spec, treat_none, 40000, 11);
  CHECK(v_all > 0.0);
  CHECK(v_all < 1.0);
  CHECK(v_none > 0.0);
  CHECK(v_none < 1.0);
  // The demo effect pathway is positive, so universal assignment wins.
  CHECK(v_all > v_none + 0.02);
  CHECK(forward_policy_value(spec, treat_all, 40000, 11) == v_all);
  CHECK_THROWS_AS(forward_policy_value(spec, treat_all, 0, 1), ArgumentError);
}
