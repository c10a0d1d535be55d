#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latentad/sample.hpp"

namespace latentad {

using cplx = std::complex<double>;
using CArray = std::vector<cplx>;

/// Uniform frequency grid on [-t_max, t_max] with an odd number of points.
/// Node i sits at (i - center) * spacing, so the grid is exactly symmetric
/// and contains 0 once.
class FreqGrid {
 public:
  FreqGrid(double t_max, std::size_t points);

  double t_max() const { return t_max_; }
  std::size_t size() const { return values_.size(); }
  std::size_t center() const { return (values_.size() - 1) / 2; }
  /// Number of nodes with t >= 0.
  std::size_t half_size() const { return center() + 1; }
  double spacing() const { return spacing_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  /// Composite trapezoid weight of node i.
  double weight(std::size_t i) const {
    return (i == 0 || i + 1 == size()) ? 0.5 * spacing_ : spacing_;
  }

 private:
  double t_max_;
  double spacing_;
  std::vector<double> values_;
};

/// Replaces d by d * max(1, rho/|d|): the magnitude is clipped below at rho
/// and the phase kept. An exact zero maps to rho.
inline cplx regularize(cplx d, double rho) {
  const double m = std::abs(d);
  if (m >= rho) return d;
  if (m == 0.0) return {rho, 0.0};
  return d * (rho / m);
}

/// Empirical and deconvolved characteristic functions on one grid.
///
/// The arrays are indexed like the grid. Operations fill them in order:
/// empirical_cfs -> kotlarski_f_ft -> error_cf -> h_ft_estimate. Each
/// returns a new set; a filled set is never mutated afterwards.
struct CharFunSet {
  FreqGrid grid;
  double rho = 0.0;            // regularization floor for denominators
  std::size_t n = 0;           // sample size behind the empirical arrays

  CArray mu1;                  // n^-1 sum e^{itX}
  CArray mu2;                  // n^-1 sum e^{itW}, also the estimate of f_W^ft
  CArray mu3;                  // n^-1 sum X e^{itW}
  CArray f_ft;                 // latent X* CF via Kotlarski
  CArray feps_ft;              // measurement error CF, mu1 / f_ft
  CArray h_num;                // n^-1 sum (Y - cW) e^{itX}
  CArray h_ft;                 // h_num / feps_ft
  std::optional<double> c;     // constant used for h_num / h_ft

  // Fraction of t >= 0 nodes where a denominator hit the floor, per stage.
  double mu2_floor_fraction = 0.0;
  double f_floor_fraction = 0.0;
  double feps_floor_fraction = 0.0;
  std::vector<std::string> warnings;

  explicit CharFunSet(FreqGrid g) : grid(std::move(g)) {}

  const CArray& fW_ft() const { return mu2; }
  const CArray& fX_ft() const { return mu1; }

  bool has_empirical() const { return !mu1.empty() && !mu2.empty() && !mu3.empty(); }
  bool has_f() const { return !f_ft.empty(); }
  bool has_feps() const { return !feps_ft.empty(); }
  bool has_h() const { return !h_ft.empty() && c.has_value(); }
};

struct CharFunOptions {
  /// Floor for |denominator|; nullopt means n^{-1/2}.
  std::optional<double> rho;
  /// Warn when more than this fraction of nodes needed the floor.
  double saturation_fraction = 0.5;
  std::size_t threads = 1;
};

/// Weighted empirical transform sum_j weights_k[j] e^{i t v_j} / n on the
/// t >= 0 half of the grid, one output array per weight vector. An empty
/// weight span means all ones. Summation runs over j in input order for
/// every node, independent of `threads`.
std::vector<CArray> half_grid_transform(std::span<const double> v,
                                        const std::vector<std::span<const double>>& weights,
                                        const FreqGrid& grid, std::size_t threads = 1);

/// Extends a t >= 0 half array to the full grid by a(-t) = conj(a(t)).
CArray reflect_half(const CArray& half, const FreqGrid& grid);

/// mu1, mu2, mu3 of the sample. Requires n >= 2.
CharFunSet empirical_cfs(const Sample& sample, const FreqGrid& grid,
                         const CharFunOptions& opts = {});

/// f^ft(t) = exp(int_0^t i mu3(s) / mu2(s) ds) with a cumulative trapezoid
/// outward from 0 and |mu2| floored at rho.
CharFunSet kotlarski_f_ft(CharFunSet cfs, const CharFunOptions& opts = {});

/// f_eps^ft = mu1 / f^ft with |f^ft| floored at rho.
CharFunSet error_cf(CharFunSet cfs, const CharFunOptions& opts = {});

/// h_c^ft = [n^-1 sum (Y - cW) e^{itX}] / f_eps^ft with |f_eps^ft| floored.
CharFunSet h_ft_estimate(const Sample& sample, double c, CharFunSet cfs,
                         const CharFunOptions& opts = {});

/// All four stages in order.
CharFunSet estimate_charfuns(const Sample& sample, double c, const FreqGrid& grid,
                             const CharFunOptions& opts = {});

/// Population characteristic functions, for substituting known CFs into
/// the estimator or the influence function. mu3 is E[X e^{itW}].
struct TrueCharFuns {
  std::function<cplx(double)> f_x;
  std::function<cplx(double)> f_w;
  std::function<cplx(double)> e_x_eitw;
  std::function<cplx(double)> f_latent;
  std::function<cplx(double)> f_eps;
  std::function<cplx(double)> h;
};

/// Fills every array of a CharFunSet from population CFs (h_num = h * f_eps).
CharFunSet charfuns_from_truth(const TrueCharFuns& truth, double c, const FreqGrid& grid,
                               double rho, std::size_t n);

/// Diagnostic dump: t followed by re/im columns of every filled array.
void write_charfun_csv(const std::string& path, const CharFunSet& cfs,
                       const std::vector<std::string>& comments = {});

}  // namespace latentad
