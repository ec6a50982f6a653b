#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "dtrbo/bayesopt.hpp"
#include "dtrbo/estimators.hpp"
#include "dtrbo/gp.hpp"
#include "dtrbo/math/truncated_normal.hpp"
#include "dtrbo/policy.hpp"
#include "dtrbo/rng.hpp"
#include "dtrbo/simbench.hpp"

namespace {

using namespace dtrbo;

struct GpProblem {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd targets;
  gp::KernelSpec kernel;
};

GpProblem make_gp_problem(int n) {
  Rng rng(7);
  GpProblem p;
  p.inputs.resize(n, 2);
  p.targets.resize(n);
  for (int i = 0; i < n; ++i) {
    p.inputs(i, 0) = rng.uniform();
    p.inputs(i, 1) = rng.uniform();
    p.targets[i] = std::sin(6.0 * p.inputs(i, 0)) + 0.5 * p.inputs(i, 1) + 0.05 * rng.normal();
  }
  p.kernel.nu = 1.5;
  p.kernel.signal_variance = 1.0;
  p.kernel.lengthscales = Eigen::Vector2d(0.3, 0.3);
  p.kernel.noise_variance = 1e-3;
  return p;
}

void BM_GpFit(benchmark::State& state) {
  const auto p = make_gp_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gp::gp_fit(p.kernel, p.inputs, p.targets));
  }
}
BENCHMARK(BM_GpFit)->Arg(50)->Arg(100);

void BM_GpPredict(benchmark::State& state) {
  const auto p = make_gp_problem(100);
  const auto model = gp::gp_fit(p.kernel, p.inputs, p.targets);
  const Eigen::Vector2d q(0.4, 0.6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gp::gp_predict(model, q));
  }
}
BENCHMARK(BM_GpPredict);

void BM_TuneWarmStart(benchmark::State& state) {
  const auto p = make_gp_problem(60);
  gp::TuneConfig cfg;
  cfg.restarts = 1;
  cfg.max_evals_per_restart = 50;
  cfg.warm_start = p.kernel;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gp::tune_hyperparameters(p.inputs, p.targets, {}, cfg));
  }
}
BENCHMARK(BM_TuneWarmStart);

void BM_MaximizeEi(benchmark::State& state) {
  const auto p = make_gp_problem(100);
  const auto model = gp::gp_fit(p.kernel, p.inputs, p.targets);
  const policy::ParamBox box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
  const double f_min = p.targets.minCoeff();
  for (auto _ : state) {
    benchmark::DoNotOptimize(bayesopt::maximize_ei(model, box, f_min, 11));
  }
}
BENCHMARK(BM_MaximizeEi);

void BM_EstimatorSweep(benchmark::State& state) {
  simbench::DgpSpec spec;
  spec.setting = 2;
  spec.n = 500;
  const auto data = simbench::generate_dataset(spec, 3);
  const policy::Policy pol{policy::ThresholdPolicy{0.3, 0.8}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimators::sipw_value(data, pol));
  }
}
BENCHMARK(BM_EstimatorSweep);

void BM_TruncNormSample(benchmark::State& state) {
  Rng rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(math::trunc_norm_sample(0.7, 0.15, 0.0, 1.0, rng.uniform()));
  }
}
BENCHMARK(BM_TruncNormSample);

}  // namespace

BENCHMARK_MAIN();
