#include "dtrbo/math/mcmc.hpp"

#include <cmath>
#include <limits>

#include "dtrbo/errors.hpp"
#include "dtrbo/math/stats.hpp"
#include "dtrbo/parallel.hpp"
#include "dtrbo/rng.hpp"

namespace dtrbo::math {

namespace {

struct ChainOutput {
  Eigen::MatrixXd kept;
  long accepted_post = 0;
};

ChainOutput run_chain(const std::function<double(const Eigen::VectorXd&)>& log_target,
                      const Eigen::VectorXd& init, const McmcConfig& cfg, Rng rng) {
  const Eigen::Index d = init.size();
  const Eigen::VectorXd base_scale =
      cfg.init_scale.size() > 0 ? cfg.init_scale : Eigen::VectorXd::Ones(d);
  Eigen::VectorXd x = init;
  for (Eigen::Index i = 0; i < d; ++i) {
    x[i] += cfg.init_jitter * base_scale[i] * rng.normal();
  }
  double lp = log_target(x);
  if (!std::isfinite(lp)) {
    // Overdispersion may start outside the support; fall back to init itself.
    x = init;
    lp = log_target(x);
    if (!std::isfinite(lp)) {
      throw ArgumentError("run_adaptive_rwm: log target not finite at the initial point");
    }
  }

  double lambda = cfg.init_lambda > 0.0 ? cfg.init_lambda
                                        : 2.38 / std::sqrt(static_cast<double>(d));
  Eigen::VectorXd scale = base_scale;
  // Welford accumulators over the burn-in history feed the per-parameter scales.
  Eigen::VectorXd run_mean = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd run_m2 = Eigen::VectorXd::Zero(d);
  long run_count = 0;

  const int kept_n = cfg.n_iter - cfg.n_burnin;
  ChainOutput out;
  out.kept.resize(kept_n, d);

  int batch_accepted = 0;
  int batch_size = 0;
  int batch_index = 0;
  long total_accepted_burn = 0;
  Eigen::VectorXd prop(d);
  for (int it = 0; it < cfg.n_iter; ++it) {
    for (Eigen::Index i = 0; i < d; ++i) {
      prop[i] = x[i] + lambda * scale[i] * rng.normal();
    }
    const double lp_prop = log_target(prop);
    bool accept = false;
    if (std::isfinite(lp_prop)) {
      accept = lp_prop >= lp || std::log(rng.uniform()) < lp_prop - lp;
    }
    if (accept) {
      x = prop;
      lp = lp_prop;
    }

    if (it < cfg.n_burnin) {
      // Restart the SD window halfway in so the pre-equilibration wander does
      // not contaminate the frozen scales.
      if (it == cfg.n_burnin / 2) {
        run_mean.setZero();
        run_m2.setZero();
        run_count = 0;
      }
      ++run_count;
      for (Eigen::Index i = 0; i < d; ++i) {
        const double delta = x[i] - run_mean[i];
        run_mean[i] += delta / static_cast<double>(run_count);
        run_m2[i] += delta * (x[i] - run_mean[i]);
      }
      batch_accepted += accept ? 1 : 0;
      if (++batch_size == cfg.adapt_batch) {
        ++batch_index;
        total_accepted_burn += batch_accepted;
        const double rate =
            static_cast<double>(batch_accepted) / static_cast<double>(batch_size);
        lambda *= std::exp(2.0 * (rate - cfg.target_accept) /
                           std::sqrt(static_cast<double>(batch_index)));
        // Only trust empirical SDs once the chain has actually moved; floor
        // them against the starting scales so a sticky start cannot collapse
        // a parameter's proposals permanently.
        if (run_count > 1 && total_accepted_burn >= 20) {
          for (Eigen::Index i = 0; i < d; ++i) {
            const double sd =
                std::sqrt(run_m2[i] / static_cast<double>(run_count - 1));
            scale[i] = std::max(sd, 1e-3 * base_scale[i]);
          }
        }
        batch_accepted = 0;
        batch_size = 0;
      }
    } else {
      out.kept.row(it - cfg.n_burnin) = x;
      out.accepted_post += accept ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

McmcResult run_adaptive_rwm(const std::function<double(const Eigen::VectorXd&)>& log_target,
                            const Eigen::VectorXd& init, const McmcConfig& cfg,
                            std::uint64_t seed) {
  if (init.size() < 1) throw ArgumentError("run_adaptive_rwm: empty parameter vector");
  if (cfg.n_chains < 2) throw ArgumentError("run_adaptive_rwm: needs >= 2 chains");
  if (cfg.n_burnin < cfg.adapt_batch || cfg.n_iter <= cfg.n_burnin) {
    throw ArgumentError("run_adaptive_rwm: need burnin >= one batch and iters > burnin");
  }

  const Eigen::Index d = init.size();
  const auto n_chains = static_cast<std::size_t>(cfg.n_chains);
  std::vector<ChainOutput> outputs(n_chains);
  parallel_for(n_chains, [&](std::size_t c) {
    Rng rng(mix_seed(seed, 0x6d636d63ULL, static_cast<std::uint64_t>(c)));
    outputs[c] = run_chain(log_target, init, cfg, std::move(rng));
  });

  McmcResult result;
  const int kept_n = cfg.n_iter - cfg.n_burnin;
  result.draws.resize(static_cast<Eigen::Index>(n_chains) * kept_n, d);
  long accepted = 0;
  for (std::size_t c = 0; c < n_chains; ++c) {
    result.chains.push_back(outputs[c].kept);
    result.draws.middleRows(static_cast<Eigen::Index>(c) * kept_n, kept_n) =
        outputs[c].kept;
    accepted += outputs[c].accepted_post;
  }
  result.accept_rate = static_cast<double>(accepted) /
                       static_cast<double>(static_cast<long>(n_chains) * kept_n);

  result.rhat.resize(d);
  result.ess.resize(d);
  for (Eigen::Index p = 0; p < d; ++p) {
    std::vector<std::vector<double>> scalar_chains;
    for (const auto& chain : result.chains) {
      const auto col = chain.col(p);
      scalar_chains.emplace_back(col.data(), col.data() + col.size());
    }
    result.rhat[p] = split_rhat(scalar_chains);
    result.ess[p] = ess(scalar_chains);
  }
  return result;
}

}  // namespace dtrbo::math
