#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "latentad/charfun.hpp"
#include "latentad/estimator.hpp"
#include "latentad/sample.hpp"

namespace latentad {

/// Per-observation influence values and their two parts. branch1 carries
/// the known-error term, branch2 the correction for estimating f_eps^ft.
struct InfluenceValues {
  std::vector<double> xi;
  std::vector<double> branch1;
  std::vector<double> branch2;
  double max_imag_residual = 0.0;
};

/// Influence function of theta_hat evaluated at every observation:
///
///   xi(y,x,w) = (1/pi) Re int i t w(t b) {
///       [h(-t) - (y - cw) f(-t)] e^{itx} / f_eps(t)
///     + [f(t) h(-t) - f(-t) h(t)]
///       * [ -e^{itx} / f_X(t) + int_0^t (-i mu3(s)/f_W(s) + ix) e^{isw} / f_W(s) ds ] } dt
///
/// where w is the regularizing weight selected in cfg (K^ft or its square).
/// The inner s-integral is a cumulative trapezoid from 0 outward, so the
/// whole evaluation is O(G) per observation. Every denominator is floored
/// at cfs.rho. Needs a complete CharFunSet (including h for cfg.c).
InfluenceValues xi_hat_all(const Sample& sample, const CharFunSet& cfs,
                           const EstimatorConfig& cfg);

/// n^-1 sum xi^2. Not centered: the influence function has mean zero.
double variance_estimate(std::span<const double> xi);

/// Standard normal CDF through erfc; absolute error well below 1e-10.
double normal_cdf(double z);

struct Studentized {
  double z = 0.0;
  double p_value = 0.5;            // lower tail, Phi(z)
  double p_value_two_sided = 1.0;
  bool reject = false;             // p_value < size
};

/// z = theta / std_error and the one-sided (lower tail) decision.
Studentized studentize(double theta_hat, double std_error, double size);

struct TestResult {
  double theta_hat = 0.0;
  double s_hat_sq = 0.0;           // n^-1 sum xi^2
  double s_hat = 0.0;              // sqrt(s_hat_sq)
  double std_error = 0.0;          // sqrt(s_hat_sq / n)
  double z = 0.0;
  double p_value = 0.5;
  double p_value_two_sided = 1.0;
  bool reject = false;
  double size = 0.05;
  double c = 1.0;
  std::size_t n = 0;
  double bandwidth = 0.0;
  double rho = 0.0;
  double xi_mean = 0.0;
  std::vector<std::string> diagnostics;
};

/// H0: theta_c >= 0 against H1: theta_c < 0.
///
/// A zero variance estimate is an error unless theta_hat is also exactly
/// zero (e.g. Y = cW identically); that case reports z = 0, p = 1/2 and a
/// diagnostic instead.
TestResult run_test(const Sample& sample, const EstimatorConfig& cfg, double size);

}  // namespace latentad
