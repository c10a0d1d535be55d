#include "latentad/kernels.hpp"

#include <cmath>
#include <numbers>

#include "latentad/error.hpp"

namespace latentad {

std::optional<int> KernelSpec::order() const {
  if (name == KernelName::polynomial_order2) return 2;
  return std::nullopt;
}

std::string KernelSpec::label() const {
  return name == KernelName::flat_top_trapezoid ? "flat_top_trapezoid" : "polynomial_order2";
}

KernelSpec KernelSpec::parse(const std::string& name) {
  if (name == "flat_top" || name == "flat_top_trapezoid") return flat_top();
  if (name == "polynomial_order2" || name == "poly2") return polynomial2();
  throw InvalidConfig("unknown kernel '" + name +
                     "' (expected flat_top_trapezoid or polynomial_order2)");
}

double kft_eval(const KernelSpec& spec, double t) {
  const double a = std::abs(t);
  if (a > 1.0) return 0.0;
  switch (spec.name) {
    case KernelName::flat_top_trapezoid:
      return a <= 0.5 ? 1.0 : 2.0 * (1.0 - a);
    case KernelName::polynomial_order2: {
      const double q = 1.0 - t * t;
      return q * q * q;
    }
  }
  return 0.0;
}

Bandwidth::Bandwidth(double b) : b_(b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw InvalidConfig("bandwidth must be a positive finite number");
  }
}

Bandwidth rule_of_thumb_bandwidth(std::span<const double> x, double scale) {
  if (x.size() < 2) throw InvalidInput("bandwidth rule needs at least two observations");
  if (!(scale > 0.0)) throw InvalidConfig("bandwidth scale must be positive");
  const double sd = sample_sd(x);
  if (!(sd > 0.0)) throw InvalidInput("bandwidth rule: X has zero spread");
  return Bandwidth(scale * sd * std::pow(static_cast<double>(x.size()), -1.0 / 6.0));
}

void require_grid_covers(const FreqGrid& grid, Bandwidth b) {
  const double need = 1.0 / b.value();
  if (grid.t_max() < need * (1.0 - 1e-12)) {
    throw InvalidConfig("frequency grid reaches " + std::to_string(grid.t_max()) +
                        " but the kernel needs |t| up to 1/b = " + std::to_string(need));
  }
}

namespace {

constexpr std::size_t kBlock = 64;

// sum_k coef[k] * exp(-i k dt u), advanced by rotation within blocks.
cplx phase_sum(std::span<const cplx> coef, double dt, double u) {
  cplx total = 0.0;
  const cplx step = std::polar(1.0, -dt * u);
  for (std::size_t k0 = 0; k0 < coef.size(); k0 += kBlock) {
    const std::size_t k1 = std::min(coef.size(), k0 + kBlock);
    cplx phase = std::polar(1.0, -static_cast<double>(k0) * dt * u);
    cplx acc = 0.0;
    for (std::size_t k = k0; k < k1; ++k) {
      acc += coef[k] * phase;
      phase *= step;
    }
    total += acc;
  }
  return total;
}

}  // namespace

DeconvolutionKernel::DeconvolutionKernel(const KernelSpec& spec, const CharFunSet& cfs,
                                         Bandwidth b)
    : b_(b.value()) {
  if (!cfs.has_feps()) throw InvalidState("deconvolution kernel needs feps_ft");
  require_grid_covers(cfs.grid, b);
  build(spec, cfs.grid, cfs.feps_ft, cfs.rho);
}

DeconvolutionKernel::DeconvolutionKernel(const KernelSpec& spec, const FreqGrid& grid,
                                         const CArray& feps, double rho, Bandwidth b)
    : b_(b.value()) {
  if (feps.size() != grid.size()) throw InvalidInput("error CF does not match the grid");
  require_grid_covers(grid, b);
  build(spec, grid, feps, rho);
}

void DeconvolutionKernel::build(const KernelSpec& spec, const FreqGrid& grid, const CArray& feps,
                                double rho) {
  t_.resize(grid.size());
  weight_.resize(grid.size());
  phi_.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t_[i] = grid[i] * b_;
    weight_[i] = grid.weight(i) * b_;
    phi_[i] = kft_eval(spec, t_[i]) / regularize(feps[i], rho);
  }
}

DeconvolutionKernel::Value DeconvolutionKernel::evaluate(double u) const {
  cplx v = 0.0, d = 0.0;
  const cplx minus_i(0.0, -1.0);
  for (std::size_t i = 0; i < t_.size(); ++i) {
    if (phi_[i] == 0.0) continue;
    const cplx term = weight_[i] * phi_[i] * std::polar(1.0, -t_[i] * u);
    v += term;
    d += minus_i * t_[i] * term;
  }
  const double s = 0.5 / std::numbers::pi;
  return {v * s, d * s};
}

void DeconvolutionKernel::tabulate(std::span<const double> u, std::span<double> value,
                                   std::span<double> derivative) const {
  if (value.size() != u.size() || derivative.size() != u.size()) {
    throw InvalidInput("tabulate: output spans must match the input");
  }
  const std::size_t c = (t_.size() - 1) / 2;
  std::size_t last = c;
  while (last + 1 < t_.size() && phi_[last + 1] != 0.0) ++last;
  const std::size_t m = last - c + 1;
  // Half-grid coefficients; the t = 0 node counts once in the full sum.
  std::vector<cplx> cv(m), cd(m);
  const cplx minus_i(0.0, -1.0);
  for (std::size_t k = 0; k < m; ++k) {
    cv[k] = weight_[c + k] * phi_[c + k];
    cd[k] = minus_i * t_[c + k] * cv[k];
  }
  cv[0] *= 0.5;
  const double dt = t_[c + 1] - t_[c];
  for (std::size_t q = 0; q < u.size(); ++q) {
    value[q] = phase_sum(cv, dt, u[q]).real() / std::numbers::pi;
    derivative[q] = phase_sum(cd, dt, u[q]).real() / std::numbers::pi;
  }
}

double deconv_kernel_eval(const KernelSpec& spec, const CharFunSet& cfs, Bandwidth b, double u) {
  const DeconvolutionKernel kernel(spec, cfs, b);
  const auto v = kernel.evaluate(u);
  const double re = v.value.real();
  if (std::abs(v.value.imag()) > 1e-8 * std::max(1.0, std::abs(re))) {
    throw NumericalError("deconvolution kernel has imaginary residual " +
                         std::to_string(v.value.imag()) + " at u = " + std::to_string(u) +
                         "; the error CF is not conjugate-symmetric");
  }
  return re;
}

std::vector<double> deconv_density(std::span<const double> sample_x, const KernelSpec& spec,
                                   const CharFunSet& cfs, Bandwidth b,
                                   std::span<const double> xgrid) {
  if (sample_x.empty()) throw InvalidInput("deconv_density: empty sample");
  if (!cfs.has_feps()) throw InvalidState("deconv_density needs feps_ft");
  const auto& grid = cfs.grid;
  require_grid_covers(grid, b);
  const auto m = half_grid_transform(sample_x, {{}}, grid)[0];
  const std::size_t c = grid.center();
  std::vector<cplx> coef(grid.half_size());
  for (std::size_t k = 0; k < coef.size(); ++k) {
    coef[k] = grid.weight(c + k) * kft_eval(spec, grid[c + k] * b.value()) * m[k] /
              regularize(cfs.feps_ft[c + k], cfs.rho);
  }
  coef[0] *= 0.5;
  std::vector<double> out(xgrid.size());
  for (std::size_t q = 0; q < xgrid.size(); ++q) {
    out[q] = phase_sum(coef, grid.spacing(), xgrid[q]).real() / std::numbers::pi;
  }
  return out;
}

}  // namespace latentad
