#include "latentad/charfun.hpp"

#include <cmath>
#include <fstream>

#include "latentad/csv.hpp"
#include "latentad/error.hpp"
#include "latentad/parallel.hpp"

namespace latentad {

FreqGrid::FreqGrid(double t_max, std::size_t points) : t_max_(t_max) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw InvalidConfig("frequency grid t_max must be positive and finite");
  }
  if (points < 3 || points % 2 == 0) {
    throw InvalidConfig("frequency grid needs an odd number of points >= 3, got " +
                        std::to_string(points));
  }
  const auto half = static_cast<double>((points - 1) / 2);
  spacing_ = t_max / half;
  values_.resize(points);
  const auto c = static_cast<std::ptrdiff_t>((points - 1) / 2);
  for (std::size_t i = 0; i < points; ++i) {
    const auto k = static_cast<std::ptrdiff_t>(i) - c;
    // (-k) * h == -(k * h) exactly, so the grid is symmetric bit-for-bit.
    values_[i] = static_cast<double>(k) * spacing_;
  }
  values_.back() = t_max;
  values_.front() = -t_max;
}

namespace {

// Phases are advanced by repeated rotation inside a block and recomputed
// exactly at each block start, which bounds the drift to ~64 ulps.
constexpr std::size_t kBlock = 64;

double floor_fraction(std::size_t hits, const FreqGrid& grid) {
  return static_cast<double>(hits) / static_cast<double>(grid.half_size());
}

void maybe_warn(CharFunSet& cfs, const char* what, double fraction, double limit) {
  if (fraction > limit) {
    cfs.warnings.push_back(std::string("ill-conditioned: |") + what +
                           "| was floored at rho on " +
                           std::to_string(static_cast<int>(std::lround(100 * fraction))) +
                           "% of frequencies");
  }
}

double resolve_rho(const CharFunOptions& opts, std::size_t n) {
  const double rho = opts.rho.value_or(1.0 / std::sqrt(static_cast<double>(n)));
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw InvalidConfig("rho must be nonnegative");
  return rho;
}

}  // namespace

std::vector<CArray> half_grid_transform(std::span<const double> v,
                                        const std::vector<std::span<const double>>& weights,
                                        const FreqGrid& grid, std::size_t threads) {
  const std::size_t n = v.size();
  const std::size_t half = grid.half_size();
  const std::size_t c = grid.center();
  for (const auto& wt : weights) {
    if (!wt.empty() && wt.size() != n) throw InvalidInput("weight length differs from data");
  }
  std::vector<CArray> out(weights.size(), CArray(half));
  const std::size_t blocks = (half + kBlock - 1) / kBlock;
  std::vector<cplx> step(n);
  for (std::size_t j = 0; j < n; ++j) step[j] = std::polar(1.0, grid.spacing() * v[j]);

  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::size_t k0 = b * kBlock;
    const std::size_t k1 = std::min(half, k0 + kBlock);
    const double t0 = grid[c + k0];
    std::vector<CArray> acc(weights.size(), CArray(k1 - k0));
    for (std::size_t j = 0; j < n; ++j) {
      cplx phase = std::polar(1.0, t0 * v[j]);
      for (std::size_t k = k0; k < k1; ++k) {
        for (std::size_t q = 0; q < weights.size(); ++q) {
          const double wj = weights[q].empty() ? 1.0 : weights[q][j];
          acc[q][k - k0] += wj * phase;
        }
        phase *= step[j];
      }
    }
    const auto nd = static_cast<double>(n);
    for (std::size_t q = 0; q < weights.size(); ++q)
      for (std::size_t k = k0; k < k1; ++k) out[q][k] = acc[q][k - k0] / nd;
  });
  return out;
}

CArray reflect_half(const CArray& half, const FreqGrid& grid) {
  if (half.size() != grid.half_size()) throw InvalidInput("half array does not match grid");
  const std::size_t c = grid.center();
  CArray full(grid.size());
  for (std::size_t k = 0; k < half.size(); ++k) {
    full[c + k] = half[k];
    full[c - k] = std::conj(half[k]);
  }
  full[c] = half[0];
  return full;
}

CharFunSet empirical_cfs(const Sample& sample, const FreqGrid& grid, const CharFunOptions& opts) {
  if (sample.size() < 2) throw InvalidInput("characteristic functions need n >= 2 observations");
  sample.validate();
  CharFunSet cfs(grid);
  cfs.n = sample.size();
  cfs.rho = resolve_rho(opts, cfs.n);
  auto fx = half_grid_transform(sample.x, {{}}, grid, opts.threads);
  auto fw = half_grid_transform(sample.w, {{}, sample.x}, grid, opts.threads);
  cfs.mu1 = reflect_half(fx[0], grid);
  cfs.mu2 = reflect_half(fw[0], grid);
  cfs.mu3 = reflect_half(fw[1], grid);
  return cfs;
}

CharFunSet kotlarski_f_ft(CharFunSet cfs, const CharFunOptions& opts) {
  if (!cfs.has_empirical()) throw InvalidState("kotlarski_f_ft needs mu2 and mu3");
  const auto& grid = cfs.grid;
  const std::size_t c = grid.center();
  const std::size_t half = grid.half_size();
  const double h = grid.spacing();
  const cplx i1(0.0, 1.0);

  std::size_t floored = 0;
  auto integrand = [&](std::size_t k) {
    const cplx d = cfs.mu2[c + k];
    if (std::abs(d) < cfs.rho) ++floored;
    return i1 * cfs.mu3[c + k] / regularize(d, cfs.rho);
  };
  CArray f_half(half);
  cplx running = 0.0;
  cplx prev = integrand(0);
  f_half[0] = 1.0;
  for (std::size_t k = 1; k < half; ++k) {
    const cplx cur = integrand(k);
    running += 0.5 * h * (prev + cur);
    f_half[k] = std::exp(running);
    prev = cur;
  }
  cfs.f_ft = reflect_half(f_half, grid);
  cfs.mu2_floor_fraction = floor_fraction(floored, grid);
  maybe_warn(cfs, "mu2", cfs.mu2_floor_fraction, opts.saturation_fraction);
  return cfs;
}

CharFunSet error_cf(CharFunSet cfs, const CharFunOptions& opts) {
  if (!cfs.has_f() || cfs.mu1.empty()) throw InvalidState("error_cf needs mu1 and f_ft");
  const auto& grid = cfs.grid;
  const std::size_t c = grid.center();
  CArray half(grid.half_size());
  std::size_t floored = 0;
  for (std::size_t k = 0; k < half.size(); ++k) {
    const cplx d = cfs.f_ft[c + k];
    if (std::abs(d) < cfs.rho) ++floored;
    half[k] = cfs.mu1[c + k] / regularize(d, cfs.rho);
  }
  half[0] = 1.0;
  cfs.feps_ft = reflect_half(half, grid);
  cfs.f_floor_fraction = floor_fraction(floored, grid);
  maybe_warn(cfs, "f_ft", cfs.f_floor_fraction, opts.saturation_fraction);
  return cfs;
}

namespace {

CharFunSet finish_h(CharFunSet cfs, const CArray& num_half, double c_value,
                    const CharFunOptions& opts) {
  const auto& grid = cfs.grid;
  const std::size_t c = grid.center();
  CArray h_half(grid.half_size());
  std::size_t floored = 0;
  for (std::size_t k = 0; k < h_half.size(); ++k) {
    const cplx d = cfs.feps_ft[c + k];
    if (std::abs(d) < cfs.rho) ++floored;
    h_half[k] = num_half[k] / regularize(d, cfs.rho);
  }
  cfs.h_num = reflect_half(num_half, grid);
  cfs.h_ft = reflect_half(h_half, grid);
  cfs.c = c_value;
  cfs.feps_floor_fraction = floor_fraction(floored, grid);
  maybe_warn(cfs, "feps_ft", cfs.feps_floor_fraction, opts.saturation_fraction);
  return cfs;
}

std::vector<double> outcome_minus_cw(const Sample& s, double c) {
  std::vector<double> r(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) r[j] = s.y[j] - c * s.w[j];
  return r;
}

}  // namespace

CharFunSet h_ft_estimate(const Sample& sample, double c, CharFunSet cfs,
                         const CharFunOptions& opts) {
  if (!cfs.has_feps()) throw InvalidState("h_ft_estimate needs feps_ft");
  if (sample.size() != cfs.n) throw InvalidInput("sample size differs from the one behind cfs");
  const auto r = outcome_minus_cw(sample, c);
  auto num = half_grid_transform(sample.x, {r}, cfs.grid, opts.threads);
  return finish_h(std::move(cfs), num[0], c, opts);
}

CharFunSet estimate_charfuns(const Sample& sample, double c, const FreqGrid& grid,
                             const CharFunOptions& opts) {
  if (sample.size() < 2) throw InvalidInput("characteristic functions need n >= 2 observations");
  sample.validate();
  // One pass over X for both mu1 and the h numerator.
  const auto r = outcome_minus_cw(sample, c);
  auto fx = half_grid_transform(sample.x, {{}, r}, grid, opts.threads);
  auto fw = half_grid_transform(sample.w, {{}, sample.x}, grid, opts.threads);
  CharFunSet cfs(grid);
  cfs.n = sample.size();
  cfs.rho = resolve_rho(opts, cfs.n);
  cfs.mu1 = reflect_half(fx[0], grid);
  cfs.mu2 = reflect_half(fw[0], grid);
  cfs.mu3 = reflect_half(fw[1], grid);
  cfs = kotlarski_f_ft(std::move(cfs), opts);
  cfs = error_cf(std::move(cfs), opts);
  return finish_h(std::move(cfs), fx[1], c, opts);
}

CharFunSet charfuns_from_truth(const TrueCharFuns& truth, double c, const FreqGrid& grid,
                               double rho, std::size_t n) {
  CharFunSet cfs(grid);
  cfs.n = n;
  cfs.rho = rho;
  cfs.c = c;
  auto fill = [&](const std::function<cplx(double)>& fn) {
    if (!fn) throw InvalidInput("charfuns_from_truth: missing characteristic function");
    CArray a(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) a[i] = fn(grid[i]);
    return a;
  };
  cfs.mu1 = fill(truth.f_x);
  cfs.mu2 = fill(truth.f_w);
  cfs.mu3 = fill(truth.e_x_eitw);
  cfs.f_ft = fill(truth.f_latent);
  cfs.feps_ft = fill(truth.f_eps);
  cfs.h_ft = fill(truth.h);
  cfs.h_num.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) cfs.h_num[i] = cfs.h_ft[i] * cfs.feps_ft[i];
  return cfs;
}

void write_charfun_csv(const std::string& path, const CharFunSet& cfs,
                       const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  for (const auto& line : comments) out << "# " << line << '\n';
  struct Col {
    const char* name;
    const CArray* data;
  };
  const Col cols[] = {{"mu1", &cfs.mu1},   {"mu2", &cfs.mu2},         {"mu3", &cfs.mu3},
                      {"f", &cfs.f_ft},    {"feps", &cfs.feps_ft},    {"fW", &cfs.mu2},
                      {"h", &cfs.h_ft}};
  out << "t";
  for (const auto& col : cols)
    if (!col.data->empty()) out << ',' << col.name << "_re," << col.name << "_im";
  out << '\n';
  for (std::size_t i = 0; i < cfs.grid.size(); ++i) {
    out << csv::format_double(cfs.grid[i]);
    for (const auto& col : cols) {
      if (col.data->empty()) continue;
      out << ',' << csv::format_double((*col.data)[i].real()) << ','
          << csv::format_double((*col.data)[i].imag());
    }
    out << '\n';
  }
  if (!out) throw InvalidInput("write to '" + path + "' failed");
}

}  // namespace latentad
