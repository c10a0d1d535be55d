#include "latentad/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "latentad/error.hpp"

namespace latentad {

std::string to_string(XiWeight w) {
  return w == XiWeight::kernel_ft ? "kernel_ft" : "kernel_ft_squared";
}

XiWeight parse_xi_weight(const std::string& s) {
  if (s == "kernel_ft") return XiWeight::kernel_ft;
  if (s == "kernel_ft_squared") return XiWeight::kernel_ft_squared;
  throw InvalidConfig("unknown influence weight '" + s +
                     "' (expected kernel_ft or kernel_ft_squared)");
}

CharFunOptions EstimatorConfig::charfun_options() const {
  CharFunOptions o;
  o.rho = rho;
  o.saturation_fraction = saturation_fraction;
  o.threads = threads;
  return o;
}

void EstimatorConfig::validate() const {
  require_grid_covers(grid, bandwidth);
  if (!(rho >= 0.0)) throw InvalidConfig("rho must be nonnegative");
}

EstimatorConfig resolve_config(const EstimatorSettings& s, const Sample& sample) {
  if (sample.size() < 2) throw InvalidInput("the estimator needs n >= 2 observations");
  if (!std::isfinite(s.c)) throw InvalidConfig("c must be finite");
  const Bandwidth b = s.bandwidth ? Bandwidth(*s.bandwidth)
                                  : rule_of_thumb_bandwidth(sample.x, s.bandwidth_scale);
  const double rho = s.rho.value_or(1.0 / std::sqrt(static_cast<double>(sample.size())));
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw InvalidConfig("rho must be nonnegative");
  EstimatorConfig cfg{s.c, b, s.kernel, FreqGrid(1.0 / b.value(), s.grid_points), rho,
                      s.saturation_fraction, std::max<std::size_t>(1, s.threads), s.xi_weight};
  return cfg;
}

namespace {

ThetaEstimate fourier_theta(const EstimatorConfig& cfg, std::size_t n, const CArray& nu,
                            const CArray& mu1, const CArray& feps) {
  const auto& grid = cfg.grid;
  const double b = cfg.bandwidth.value();
  cplx total = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k = kft_eval(cfg.kernel, grid[i] * b);
    if (k == 0.0) continue;
    const double denom = std::norm(regularize(feps[i], cfg.rho));
    total += grid.weight(i) * cplx(0.0, grid[i]) * (k * k) * nu[i] * std::conj(mu1[i]) / denom;
  }
  total *= -1.0 / std::numbers::pi;
  ThetaEstimate est;
  est.theta_hat = total.real() + 0.0;  // no negative zero
  est.imag_residual = std::abs(total.imag());
  est.c = cfg.c;
  est.n = n;
  est.bandwidth = b;
  est.rho = cfg.rho;
  if (!std::isfinite(est.theta_hat)) throw NumericalError("theta estimate is not finite");
  if (est.imag_residual > 1e-6 * std::max(1.0, std::abs(est.theta_hat))) {
    throw NumericalError("theta integral left an imaginary residual of " +
                         std::to_string(est.imag_residual));
  }
  return est;
}

}  // namespace

ThetaEstimate estimate_theta(const Sample& sample, const EstimatorConfig& cfg) {
  cfg.validate();
  const auto cfs = estimate_charfuns(sample, cfg.c, cfg.grid, cfg.charfun_options());
  return estimate_theta(sample, cfg, cfs);
}

ThetaEstimate estimate_theta(const Sample& sample, const EstimatorConfig& cfg,
                             const CharFunSet& cfs) {
  cfg.validate();
  if (!cfs.has_h()) throw InvalidState("estimate_theta needs a complete CharFunSet");
  if (*cfs.c != cfg.c) throw InvalidState("CharFunSet was built for a different c");
  if (cfs.grid.size() != cfg.grid.size() || cfs.grid.t_max() != cfg.grid.t_max()) {
    throw InvalidState("CharFunSet grid differs from the configured grid");
  }
  auto est = fourier_theta(cfg, sample.size(), cfs.h_num, cfs.mu1, cfs.feps_ft);
  est.diagnostics = cfs.warnings;
  return est;
}

ThetaEstimate estimate_theta_known_error(const Sample& sample, const EstimatorConfig& cfg,
                                         const std::function<cplx(double)>& feps_true) {
  cfg.validate();
  if (sample.size() < 2) throw InvalidInput("the estimator needs n >= 2 observations");
  if (!feps_true) throw InvalidInput("known-error estimator needs an error CF");
  sample.validate();
  std::vector<double> r(sample.size());
  for (std::size_t j = 0; j < sample.size(); ++j) r[j] = sample.y[j] - cfg.c * sample.w[j];
  const auto fx = half_grid_transform(sample.x, {{}, r}, cfg.grid, cfg.threads);
  const auto mu1 = reflect_half(fx[0], cfg.grid);
  const auto nu = reflect_half(fx[1], cfg.grid);
  CArray feps(cfg.grid.size());
  for (std::size_t i = 0; i < cfg.grid.size(); ++i) feps[i] = feps_true(cfg.grid[i]);
  return fourier_theta(cfg, sample.size(), nu, mu1, feps);
}

std::vector<double> default_direct_xgrid(const Sample& sample, const EstimatorConfig& cfg,
                                         double reach_b, double spacing_b) {
  if (!(reach_b > 0.0) || !(spacing_b > 0.0)) {
    throw InvalidConfig("direct x grid needs a positive reach and spacing");
  }
  const double b = cfg.bandwidth.value();
  const auto [lo, hi] = std::minmax_element(sample.x.begin(), sample.x.end());
  const double range_u = (*hi - *lo) / b;
  // The trapezoid-tabulated kernel is periodic in u with this period.
  const double period = 2.0 * std::numbers::pi / (cfg.grid.spacing() * b);
  const double reach = std::min(reach_b, 0.4 * period - range_u);
  if (reach < 10.0) {
    throw InvalidConfig("frequency grid too coarse for the direct estimator: increase grid points");
  }
  const double x0 = *lo - reach * b;
  const double x1 = *hi + reach * b;
  auto points = static_cast<std::size_t>(std::ceil((x1 - x0) / (spacing_b * b))) + 1;
  if (points % 2 == 0) ++points;
  std::vector<double> xs(points);
  const double h = (x1 - x0) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) xs[i] = x0 + static_cast<double>(i) * h;
  xs.back() = x1;
  return xs;
}

ThetaEstimate estimate_theta_direct(const Sample& sample, const EstimatorConfig& cfg,
                                    const DirectOptions& opts) {
  const std::size_t n = sample.size();
  if (n > opts.max_n) {
    throw InvalidInput("direct estimator is O(n^2) per x node; n = " + std::to_string(n) +
                       " exceeds the guard of " + std::to_string(opts.max_n) +
                       " (use estimate_theta)");
  }
  cfg.validate();
  const auto cfs = estimate_charfuns(sample, cfg.c, cfg.grid, cfg.charfun_options());
  const DeconvolutionKernel kernel(cfg.kernel, cfs, cfg.bandwidth);
  const double b = cfg.bandwidth.value();
  const auto xs = opts.xgrid.empty() ? default_direct_xgrid(sample, cfg, opts.reach, opts.spacing)
                                         : opts.xgrid;
  if (xs.size() < 2) throw InvalidInput("direct estimator needs at least two x nodes");
  const std::size_t m = xs.size();

  std::vector<double> wx(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double left = i > 0 ? xs[i] - xs[i - 1] : 0.0;
    const double right = i + 1 < m ? xs[i + 1] - xs[i] : 0.0;
    wx[i] = 0.5 * (left + right);
  }

  std::vector<std::vector<double>> kval(n, std::vector<double>(m));
  std::vector<std::vector<double>> kder(n, std::vector<double>(m));
  std::vector<double> u(m);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) u[i] = (xs[i] - sample.x[j]) / b;
    kernel.tabulate(u, kval[j], kder[j]);
  }

  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double r = sample.y[j] - cfg.c * sample.w[j];
    double row = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double integral = 0.0;
      for (std::size_t i = 0; i < m; ++i) integral += wx[i] * kval[j][i] * kder[k][i];
      row += integral;
    }
    total += r * row;
  }
  ThetaEstimate est;
  est.theta_hat = -2.0 / (static_cast<double>(n) * static_cast<double>(n) * b * b * b) * total;
  est.c = cfg.c;
  est.n = n;
  est.bandwidth = b;
  est.rho = cfg.rho;
  est.diagnostics = cfs.warnings;
  return est;
}

}  // namespace latentad
