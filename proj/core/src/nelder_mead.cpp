#include "dtrbo/math/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dtrbo/errors.hpp"

namespace dtrbo::math {

namespace {

Eigen::VectorXd clamp_to_box(Eigen::VectorXd x, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = std::min(hi[i], std::max(lo[i], x[i]));
  }
  return x;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi, const NelderMeadOptions& opts) {
  const Eigen::Index d = x0.size();
  if (d < 1) throw ArgumentError("nelder_mead: empty starting point");
  if (lo.size() != d || hi.size() != d) {
    throw ArgumentError("nelder_mead: box dimension mismatch");
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(lo[i] < hi[i])) throw ArgumentError("nelder_mead: requires lo < hi");
  }

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };

  // Simplex seeded along the axes; steps flip inward if x0 hugs the upper face.
  std::vector<Eigen::VectorXd> verts;
  verts.reserve(static_cast<std::size_t>(d) + 1);
  verts.push_back(clamp_to_box(x0, lo, hi));
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd v = verts[0];
    double step = opts.initial_step * (hi[i] - lo[i]);
    if (v[i] + step > hi[i]) step = -step;
    v[i] += step;
    verts.push_back(clamp_to_box(std::move(v), lo, hi));
  }
  std::vector<double> fv(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) fv[i] = eval(verts[i]);

  std::vector<std::size_t> order(verts.size());
  auto reorder = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
  };
  reorder();

  while (evals < opts.max_evals) {
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];

    double spread = fv[worst] - fv[best];
    double diam = 0.0;
    for (std::size_t i = 1; i < verts.size(); ++i) {
      diam = std::max(diam, (verts[order[i]] - verts[best]).lpNorm<Eigen::Infinity>());
    }
    if (spread < opts.ftol_abs || diam < opts.xtol_abs) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += verts[order[i]];
    centroid /= static_cast<double>(verts.size() - 1);

    Eigen::VectorXd xr =
        clamp_to_box(centroid + kReflect * (centroid - verts[worst]), lo, hi);
    const double fr = eval(xr);

    if (fr < fv[best]) {
      Eigen::VectorXd xe =
          clamp_to_box(centroid + kExpand * (centroid - verts[worst]), lo, hi);
      const double fe = eval(xe);
      if (fe < fr) {
        verts[worst] = std::move(xe);
        fv[worst] = fe;
      } else {
        verts[worst] = std::move(xr);
        fv[worst] = fr;
      }
    } else if (fr < fv[second_worst]) {
      verts[worst] = std::move(xr);
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      Eigen::VectorXd xc =
          outside ? clamp_to_box(centroid + kContract * (xr - centroid), lo, hi)
                  : clamp_to_box(centroid - kContract * (centroid - verts[worst]), lo, hi);
      const double fc = eval(xc);
      if (fc < std::min(fr, fv[worst])) {
        verts[worst] = std::move(xc);
        fv[worst] = fc;
      } else {
        for (std::size_t i = 1; i < order.size(); ++i) {
          const std::size_t k = order[i];
          verts[k] = clamp_to_box(
              verts[best] + kShrink * (verts[k] - verts[best]), lo, hi);
          fv[k] = eval(verts[k]);
          if (evals >= opts.max_evals) break;
        }
      }
    }
    reorder();
  }

  reorder();
  NelderMeadResult out;
  out.x = verts[order.front()];
  out.fx = fv[order.front()];
  out.evals = evals;
  return out;
}

}  // namespace dtrbo::math
