#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latentad/charfun.hpp"
#include "latentad/kernels.hpp"
#include "latentad/sample.hpp"

namespace latentad {

/// Regularizing weight on the outer t-integral of the influence function.
/// The squared weight is the default: it makes xi the exact linearization of
/// theta_hat, while K^ft alone overstates the standard error in finite
/// samples. Both tend to 1 as b -> 0.
enum class XiWeight {
  kernel_ft,          // K^ft(t b)
  kernel_ft_squared,  // K^ft(t b)^2, the weight theta_hat itself carries
};

std::string to_string(XiWeight w);
XiWeight parse_xi_weight(const std::string& s);

/// User-facing knobs; "auto" choices are nullopt and get resolved against a
/// sample by resolve_config().
struct EstimatorSettings {
  double c = 1.0;
  std::optional<double> bandwidth;     // nullopt: scale * sd(X) * n^{-1/6}
  double bandwidth_scale = 1.0;
  KernelSpec kernel = KernelSpec::flat_top();
  std::size_t grid_points = 4097;
  std::optional<double> rho;           // nullopt: n^{-1/2}
  double saturation_fraction = 0.5;
  std::size_t threads = 1;
  XiWeight xi_weight = XiWeight::kernel_ft_squared;
};

struct EstimatorConfig {
  double c;
  Bandwidth bandwidth;
  KernelSpec kernel;
  FreqGrid grid;
  double rho;
  double saturation_fraction = 0.5;
  std::size_t threads = 1;
  XiWeight xi_weight = XiWeight::kernel_ft_squared;

  CharFunOptions charfun_options() const;
  /// Throws InvalidConfig when the grid does not reach 1/b.
  void validate() const;
};

/// Fills in the bandwidth, the floor and a grid on [-1/b, 1/b].
EstimatorConfig resolve_config(const EstimatorSettings& settings, const Sample& sample);

struct ThetaEstimate {
  double theta_hat = 0.0;
  double c = 0.0;
  std::size_t n = 0;
  double imag_residual = 0.0;
  double bandwidth = 0.0;
  double rho = 0.0;
  std::vector<std::string> diagnostics;
};

/// Frequency-domain form of the density-weighted average-derivative
/// statistic. With nu(t) = n^-1 sum (Y - cW) e^{itX},
///
///   theta_hat = -(1/pi) Re int i t K^ft(t b)^2 nu(t) conj(mu1(t)) / |f_eps^ft(t)|^2 dt,
///
/// which is the x-space double sum over kernel pairs after the x integral is
/// collapsed onto t1 = -t2. Diagonal pairs j = k are included. O(nG).
ThetaEstimate estimate_theta(const Sample& sample, const EstimatorConfig& cfg);

/// As above, reusing characteristic functions already estimated with cfg.c.
ThetaEstimate estimate_theta(const Sample& sample, const EstimatorConfig& cfg,
                             const CharFunSet& cfs);

/// The error CF is supplied instead of estimated.
ThetaEstimate estimate_theta_known_error(const Sample& sample, const EstimatorConfig& cfg,
                                         const std::function<cplx(double)>& feps_true);

struct DirectOptions {
  std::size_t max_n = 200;
  /// Half-width of the x window beyond the data, in bandwidths.
  double reach = 500.0;
  /// Largest x node spacing, in bandwidths. The kernels are band-limited to
  /// |t| <= 1/b, so any spacing below pi b integrates their product exactly.
  double spacing = 1.0;
  /// Integration nodes in x. Empty: default_direct_xgrid().
  std::vector<double> xgrid;
};

/// [min X - L b, max X + L b] with L = reach_b (reduced if the tabulated
/// kernel would wrap around its period) and node spacing <= spacing_b * b.
/// The kernels decay like 1/u^2, so the window sets the accuracy.
std::vector<double> default_direct_xgrid(const Sample& sample, const EstimatorConfig& cfg,
                                         double reach_b = 500.0, double spacing_b = 1.0);

/// Literal form: -2/(n^2 b^3) sum_j sum_k (Y_j - cW_j)
///   int K_hat((x - X_j)/b) K_hat'((x - X_k)/b) dx
/// with both kernels tabulated on xgrid and the x integral by trapezoid.
/// O(n^2 |xgrid|); refuses n > max_n.
ThetaEstimate estimate_theta_direct(const Sample& sample, const EstimatorConfig& cfg,
                                    const DirectOptions& opts = {});

}  // namespace latentad
