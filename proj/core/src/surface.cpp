#include "dtrbo/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "dtrbo/errors.hpp"
#include "dtrbo/gp.hpp"
#include "dtrbo/io/csv.hpp"

namespace dtrbo::surface {

namespace {

int level_bin(double value) { return static_cast<int>(std::floor(value / 0.05)); }

std::string hex_color(double t) {
  // Diverging ramp: cold blue → neutral → warm red.
  static constexpr double stops[3][3] = {
      {33.0, 102.0, 172.0}, {247.0, 247.0, 247.0}, {178.0, 24.0, 43.0}};
  t = std::clamp(t, 0.0, 1.0);
  const int seg = t < 0.5 ? 0 : 1;
  const double u = t < 0.5 ? t * 2.0 : (t - 0.5) * 2.0;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[seg][0] + u * (stops[seg + 1][0] - stops[seg][0]))),
                static_cast<int>(std::lround(stops[seg][1] + u * (stops[seg + 1][1] - stops[seg][1]))),
                static_cast<int>(std::lround(stops[seg][2] + u * (stops[seg + 1][2] - stops[seg][2]))));
  return buf;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

SurfaceGrid characterize_policy_class(
    const std::vector<bayesopt::EvaluationRecord>& records, const policy::ParamBox& box,
    const CharacterizeConfig& cfg,
    const std::function<double(const Eigen::VectorXd&)>& truth) {
  if (records.size() < 10) {
    throw ArgumentError("characterize_policy_class: needs >= 10 evaluation records");
  }
  if (cfg.resolution < 2) {
    throw ArgumentError("characterize_policy_class: resolution must be >= 2");
  }
  const Eigen::Index d = box.dim();
  const auto n = static_cast<Eigen::Index>(records.size());
  Eigen::MatrixXd inputs(n, d);
  Eigen::VectorXd targets(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = records[static_cast<std::size_t>(i)];
    if (rec.theta.size() != d) {
      throw ArgumentError("characterize_policy_class: record dimension mismatch");
    }
    inputs.row(i) = rec.theta.transpose();
    targets[i] = rec.value;
  }

  gp::TuneConfig tune;
  tune.nu = cfg.nu;
  tune.restarts = cfg.tune_restarts;
  if (cfg.tune_max_evals > 0) tune.max_evals_per_restart = cfg.tune_max_evals;
  tune.center_targets = cfg.center_targets;
  tune.seed = cfg.seed;
  const gp::KernelSpec kernel = gp::tune_hyperparameters(inputs, targets, {}, tune);
  gp::GpFitConfig fit_cfg;
  fit_cfg.center_targets = cfg.center_targets;
  const gp::GpModel model = gp::gp_fit(kernel, inputs, targets, {}, fit_cfg);

  SurfaceGrid grid;
  grid.lower = box.lower;
  grid.upper = box.upper;
  grid.resolution.assign(static_cast<std::size_t>(d), cfg.resolution);
  grid.param_names = box.names;
  grid.points = policy::enumerate_grid(box, grid.resolution);
  grid.surrogate_mean.reserve(grid.points.size());
  grid.level.reserve(grid.points.size());
  for (const auto& p : grid.points) {
    const double mean = gp::gp_predict(model, p).mean;
    grid.surrogate_mean.push_back(mean);
    grid.level.push_back(level_bin(mean));
  }
  if (truth) {
    grid.has_truth = true;
    grid.truth.reserve(grid.points.size());
    double abs_sum = 0.0, sq_sum = 0.0;
    for (std::size_t k = 0; k < grid.points.size(); ++k) {
      const double t = truth(grid.points[k]);
      grid.truth.push_back(t);
      const double diff = grid.surrogate_mean[k] - t;
      abs_sum += std::abs(diff);
      sq_sum += diff * diff;
    }
    const auto m = static_cast<double>(grid.points.size());
    grid.l1 = abs_sum / m;
    grid.l2 = std::sqrt(sq_sum / m);
  }
  return grid;
}

void export_grid(const SurfaceGrid& grid, const std::string& csv_path,
                 const std::string& json_path) {
  const std::size_t d = grid.resolution.size();
  io::CsvTable table;
  for (std::size_t k = 0; k < d; ++k) table.header.push_back("theta" + std::to_string(k + 1));
  table.header.push_back("surrogate_mean");
  if (grid.has_truth) table.header.push_back("truth");
  table.header.push_back("level");
  table.rows.reserve(grid.points.size());
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    std::vector<std::string> row;
    row.reserve(table.header.size());
    for (std::size_t k = 0; k < d; ++k) {
      row.push_back(io::fmt17(grid.points[i][static_cast<Eigen::Index>(k)]));
    }
    row.push_back(io::fmt17(grid.surrogate_mean[i]));
    if (grid.has_truth) row.push_back(io::fmt17(grid.truth[i]));
    row.push_back(std::to_string(grid.level[i]));
    table.rows.push_back(std::move(row));
  }
  io::write_csv(csv_path, table);

  nlohmann::json j;
  j["resolution"] = grid.resolution;
  j["lower"] = std::vector<double>(grid.lower.data(), grid.lower.data() + grid.lower.size());
  j["upper"] = std::vector<double>(grid.upper.data(), grid.upper.data() + grid.upper.size());
  j["n_points"] = grid.points.size();
  if (grid.has_truth) {
    j["l1"] = grid.l1;
    j["l2"] = grid.l2;
  }
  io::write_file(json_path, j.dump(2) + "\n");
}

std::string render_contour_svg(const SurfaceGrid& grid,
                               const std::vector<bayesopt::EvaluationRecord>& points,
                               const Eigen::VectorXd* best_theta, const ContourStyle& style) {
  if (grid.resolution.size() != 2) {
    throw ArgumentError("render_contour_svg: needs a 2-dimensional grid");
  }
  const int r1 = grid.resolution[0];
  const int r2 = grid.resolution[1];
  const double W = style.plot_px, H = style.plot_px, M = style.margin_px;
  const double total_w = W + 2 * M, total_h = H + 2 * M;
  const double cw = W / r1, ch = H / r2;

  const auto map_x = [&](double t) { return M + (t - grid.lower[0]) / (grid.upper[0] - grid.lower[0]) * W; };
  const auto map_y = [&](double t) { return M + (1.0 - (t - grid.lower[1]) / (grid.upper[1] - grid.lower[1])) * H; };

  const auto [lv_min_it, lv_max_it] = std::minmax_element(grid.level.begin(), grid.level.end());
  const int lv_min = *lv_min_it, lv_max = *lv_max_it;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(total_w) +
         "\" height=\"" + fmt2(total_h) + "\" viewBox=\"0 0 " + fmt2(total_w) + " " +
         fmt2(total_h) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt2(total_w) + "\" height=\"" + fmt2(total_h) +
         "\" fill=\"#ffffff\"/>\n";

  // One cell per grid point; point (i1, i2) sits at flat index i1*r2 + i2.
  svg += "<g class=\"cells\" stroke=\"none\">\n";
  for (int i1 = 0; i1 < r1; ++i1) {
    for (int i2 = 0; i2 < r2; ++i2) {
      const int lv = grid.level[static_cast<std::size_t>(i1) * r2 + i2];
      const double t = lv_max == lv_min ? 0.5
                                        : static_cast<double>(lv - lv_min) /
                                              static_cast<double>(lv_max - lv_min);
      svg += "<rect x=\"" + fmt2(M + i1 * cw) + "\" y=\"" + fmt2(M + (r2 - 1 - i2) * ch) +
             "\" width=\"" + fmt2(cw) + "\" height=\"" + fmt2(ch) + "\" fill=\"" +
             hex_color(t) + "\"/>\n";
    }
  }
  svg += "</g>\n";

  if (!points.empty()) {
    double sd_min = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
      if (p.std_dev > 0.0) sd_min = std::min(sd_min, p.std_dev);
    }
    svg += "<g class=\"evals\" fill=\"#222222\" fill-opacity=\"0.55\">\n";
    for (const auto& p : points) {
      // Radius tracks the precision of the estimate: tighter SEs draw bigger.
      double r = 4.0;
      if (std::isfinite(sd_min) && p.std_dev > 0.0) {
        r = std::clamp(6.0 * sd_min / p.std_dev, 1.5, 6.0);
      }
      svg += "<circle cx=\"" + fmt2(map_x(p.theta[0])) + "\" cy=\"" + fmt2(map_y(p.theta[1])) +
             "\" r=\"" + fmt2(r) + "\"/>\n";
    }
    svg += "</g>\n";
  }

  if (best_theta != nullptr) {
    const double cx = map_x((*best_theta)[0]);
    const double cy = map_y((*best_theta)[1]);
    svg += "<g class=\"best\" transform=\"translate(" + fmt2(cx) + "," + fmt2(cy) + ")\">\n";
    std::string pts;
    for (int k = 0; k < 10; ++k) {
      const double rad = k % 2 == 0 ? 9.0 : 3.8;
      const double ang = -1.5707963267948966 + k * 0.6283185307179586;
      if (k) pts += " ";
      pts += fmt2(rad * std::cos(ang)) + "," + fmt2(rad * std::sin(ang));
    }
    svg += "<polygon points=\"" + pts + "\" fill=\"#ffffff\" stroke=\"#000000\" stroke-width=\"1.2\"/>\n";
    svg += "</g>\n";
  }

  const auto axis_name = [&](std::size_t k) {
    return grid.param_names.size() == 2 ? grid.param_names[k]
                                        : "theta" + std::to_string(k + 1);
  };
  svg += "<text x=\"" + fmt2(M + W / 2) + "\" y=\"" + fmt2(total_h - 8) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         axis_name(0) + "</text>\n";
  svg += "<text x=\"14\" y=\"" + fmt2(M + H / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 14 " +
         fmt2(M + H / 2) + ")\">" + axis_name(1) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace dtrbo::surface
