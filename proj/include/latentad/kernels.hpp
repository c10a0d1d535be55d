#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latentad/charfun.hpp"

namespace latentad {

enum class KernelName { flat_top_trapezoid, polynomial_order2 };

/// A kernel given through its Fourier transform, which is even, supported
/// on [-1, 1] and equal to 1 at the origin.
struct KernelSpec {
  KernelName name = KernelName::flat_top_trapezoid;

  /// nullopt for the flat-top kernel, whose moments all vanish.
  std::optional<int> order() const;
  std::string label() const;

  static KernelSpec flat_top() { return {KernelName::flat_top_trapezoid}; }
  static KernelSpec polynomial2() { return {KernelName::polynomial_order2}; }
  /// "flat_top" / "flat_top_trapezoid" / "polynomial_order2" / "poly2".
  static KernelSpec parse(const std::string& name);
};

/// K^ft(t). flat-top: 1 on |t| <= 1/2, 2(1 - |t|) up to 1. polynomial:
/// (1 - t^2)^3 on [-1, 1]. Zero outside [-1, 1] for both.
double kft_eval(const KernelSpec& spec, double t);

class Bandwidth {
 public:
  explicit Bandwidth(double b);
  double value() const { return b_; }

 private:
  double b_;
};

/// scale * sd(x) * n^{-1/6}.
Bandwidth rule_of_thumb_bandwidth(std::span<const double> x, double scale = 1.0);

/// Deconvolution kernel u -> (1/2pi) int e^{-itu} K^ft(t) / f_eps^ft(t/b) dt
/// and its derivative. The integral is a trapezoid sum over the CF grid
/// mapped to kernel scale, t = tau * b; |f_eps^ft| is floored at rho.
class DeconvolutionKernel {
 public:
  DeconvolutionKernel(const KernelSpec& spec, const CharFunSet& cfs, Bandwidth b);
  /// Same, with an explicit error CF array on the grid (e.g. the truth).
  DeconvolutionKernel(const KernelSpec& spec, const FreqGrid& grid, const CArray& feps,
                      double rho, Bandwidth b);

  struct Value {
    cplx value;       // imaginary part is rounding only
    cplx derivative;
  };
  /// Full-grid sum; both imaginary parts are kept for inspection.
  Value evaluate(double u) const;

  /// Real value and derivative on many points, using the t >= 0 half of the
  /// grid and conjugate symmetry.
  void tabulate(std::span<const double> u, std::span<double> value,
                std::span<double> derivative) const;

  double bandwidth() const { return b_; }

 private:
  void build(const KernelSpec& spec, const FreqGrid& grid, const CArray& feps, double rho);

  double b_;
  std::vector<double> t_;        // kernel-scale frequencies tau * b
  std::vector<double> weight_;   // trapezoid weights in t
  CArray phi_;                   // K^ft(t) / f_eps^ft(t / b)
};

/// Real part of the deconvolution kernel at u. Throws NumericalError when the
/// discarded imaginary part exceeds 1e-8 * max(1, |value|), and InvalidConfig
/// when the grid does not reach 1/b.
double deconv_kernel_eval(const KernelSpec& spec, const CharFunSet& cfs, Bandwidth b, double u);

/// Deconvolution density estimate of the latent regressor on xgrid:
/// (1/(n b)) sum_j K_hat((x - x_j)/b), computed through the empirical
/// transform of sample_x.
std::vector<double> deconv_density(std::span<const double> sample_x, const KernelSpec& spec,
                                   const CharFunSet& cfs, Bandwidth b,
                                   std::span<const double> xgrid);

/// Throws InvalidConfig unless the grid covers [-1/b, 1/b].
void require_grid_covers(const FreqGrid& grid, Bandwidth b);

}  // namespace latentad
