#include "latentad/inference.hpp"

#include <cmath>
#include <numbers>

#include "latentad/error.hpp"
#include "latentad/parallel.hpp"

namespace latentad {

namespace {

constexpr std::size_t kBlock = 64;

// e^{i t_k v} for the t >= 0 half of the grid.
void half_phases(const FreqGrid& grid, double v, std::vector<cplx>& out) {
  const std::size_t half = grid.half_size();
  const std::size_t c = grid.center();
  out.resize(half);
  const cplx step = std::polar(1.0, grid.spacing() * v);
  for (std::size_t k0 = 0; k0 < half; k0 += kBlock) {
    cplx phase = std::polar(1.0, grid[c + k0] * v);
    const std::size_t k1 = std::min(half, k0 + kBlock);
    for (std::size_t k = k0; k < k1; ++k) {
      out[k] = phase;
      phase *= step;
    }
  }
}

// Observation-independent factors of the influence integrand, one per node.
struct XiTables {
  CArray p_h;     // i t w(tb) q_i h(-t) / f_eps(t)
  CArray p_f;     // -i t w(tb) q_i f(-t) / f_eps(t), multiplied by (y - cw)
  CArray d;       // i t w(tb) q_i [f(t) h(-t) - f(-t) h(t)]
  CArray q;       // -d / f_X(t)
  CArray a;       // -i mu3(s) / f_W(s)^2
  CArray inv_fw;  // 1 / f_W(s)
};

XiTables build_tables(const CharFunSet& cfs, const EstimatorConfig& cfg) {
  const auto& grid = cfs.grid;
  const std::size_t g = grid.size();
  const double b = cfg.bandwidth.value();
  const double rho = cfs.rho;
  const cplx i1(0.0, 1.0);
  XiTables t{CArray(g), CArray(g), CArray(g), CArray(g), CArray(g), CArray(g)};
  for (std::size_t i = 0; i < g; ++i) {
    const std::size_t m = g - 1 - i;  // node at -t
    double kw = kft_eval(cfg.kernel, grid[i] * b);
    if (cfg.xi_weight == XiWeight::kernel_ft_squared) kw *= kw;
    const cplx outer = i1 * grid[i] * kw * grid.weight(i);
    const cplx fe = regularize(cfs.feps_ft[i], rho);
    t.p_h[i] = outer * cfs.h_ft[m] / fe;
    t.p_f[i] = -outer * cfs.f_ft[m] / fe;
    t.d[i] = outer * (cfs.f_ft[i] * cfs.h_ft[m] - cfs.f_ft[m] * cfs.h_ft[i]);
    t.q[i] = -t.d[i] / regularize(cfs.mu1[i], rho);
    const cplx fw = regularize(cfs.mu2[i], rho);
    t.inv_fw[i] = 1.0 / fw;
    t.a[i] = -i1 * cfs.mu3[i] / (fw * fw);
  }
  return t;
}

}  // namespace

InfluenceValues xi_hat_all(const Sample& sample, const CharFunSet& cfs,
                           const EstimatorConfig& cfg) {
  if (!cfs.has_empirical() || !cfs.has_f() || !cfs.has_feps() || !cfs.has_h()) {
    throw InvalidState("xi_hat_all needs mu1, mu2, mu3, f_ft, feps_ft and h_ft");
  }
  if (*cfs.c != cfg.c) throw InvalidState("CharFunSet was built for a different c");
  sample.validate();
  require_grid_covers(cfs.grid, cfg.bandwidth);

  const auto& grid = cfs.grid;
  const std::size_t c = grid.center();
  const std::size_t half = grid.half_size();
  const double h2 = 0.5 * grid.spacing();
  const cplx i1(0.0, 1.0);
  const auto tab = build_tables(cfs, cfg);

  const std::size_t n = sample.size();
  InfluenceValues out;
  out.xi.resize(n);
  out.branch1.resize(n);
  out.branch2.resize(n);
  std::vector<double> residual(n);

  parallel_for(n, cfg.threads, [&](std::size_t j) {
    const double x = sample.x[j];
    const double w = sample.w[j];
    const double r = sample.y[j] - cfg.c * w;
    std::vector<cplx> ex_half, ew_half;
    half_phases(grid, x, ex_half);
    half_phases(grid, w, ew_half);
    auto ex = [&](std::size_t i) { return i >= c ? ex_half[i - c] : std::conj(ex_half[c - i]); };
    auto ew = [&](std::size_t i) { return i >= c ? ew_half[i - c] : std::conj(ew_half[c - i]); };
    auto inner = [&](std::size_t i) { return ew(i) * (tab.a[i] + i1 * x * tab.inv_fw[i]); };

    cplx b1 = 0.0, b2 = 0.0;
    // t = 0 contributes nothing (the i t factor) and S(0) = 0.
    cplx s_pos = 0.0, g_prev_pos = inner(c);
    cplx s_neg = 0.0, g_prev_neg = g_prev_pos;
    for (std::size_t k = 1; k < half; ++k) {
      const std::size_t ip = c + k;
      const std::size_t in = c - k;
      const cplx gp = inner(ip);
      const cplx gn = inner(in);
      s_pos += h2 * (g_prev_pos + gp);
      s_neg -= h2 * (g_prev_neg + gn);
      g_prev_pos = gp;
      g_prev_neg = gn;

      const cplx exp_ = ex(ip), exn = ex(in);
      b1 += exp_ * (tab.p_h[ip] + r * tab.p_f[ip]) + exn * (tab.p_h[in] + r * tab.p_f[in]);
      b2 += tab.q[ip] * exp_ + tab.d[ip] * s_pos + tab.q[in] * exn + tab.d[in] * s_neg;
    }
    b1 /= std::numbers::pi;
    b2 /= std::numbers::pi;
    const cplx total = b1 + b2;
    out.xi[j] = total.real();
    out.branch1[j] = b1.real();
    out.branch2[j] = b2.real();
    residual[j] = std::abs(total.imag());
  });
  for (double v : residual) out.max_imag_residual = std::max(out.max_imag_residual, v);
  for (double v : out.xi) {
    if (!std::isfinite(v)) throw NumericalError("influence function is not finite");
  }
  return out;
}

double variance_estimate(std::span<const double> xi) {
  if (xi.empty()) throw InvalidInput("variance estimate of an empty influence array");
  double s = 0.0;
  for (double v : xi) s += v * v;
  return s / static_cast<double>(xi.size());
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

Studentized studentize(double theta_hat, double std_error, double size) {
  if (!(size > 0.0 && size < 1.0)) throw InvalidInput("test size must lie in (0, 1)");
  if (!(std_error > 0.0) || !std::isfinite(std_error)) {
    throw NumericalError("standard error must be positive and finite");
  }
  Studentized s;
  s.z = theta_hat / std_error;
  s.p_value = normal_cdf(s.z);
  s.p_value_two_sided = std::erfc(std::abs(s.z) / std::numbers::sqrt2);
  s.reject = s.p_value < size;
  return s;
}

TestResult run_test(const Sample& sample, const EstimatorConfig& cfg, double size) {
  if (!(size > 0.0 && size < 1.0)) throw InvalidInput("test size must lie in (0, 1)");
  cfg.validate();
  const auto cfs = estimate_charfuns(sample, cfg.c, cfg.grid, cfg.charfun_options());
  const auto est = estimate_theta(sample, cfg, cfs);
  const auto infl = xi_hat_all(sample, cfs, cfg);

  TestResult res;
  res.theta_hat = est.theta_hat;
  res.size = size;
  res.c = cfg.c;
  res.n = sample.size();
  res.bandwidth = cfg.bandwidth.value();
  res.rho = cfg.rho;
  res.diagnostics = est.diagnostics;
  res.s_hat_sq = variance_estimate(infl.xi);
  res.s_hat = std::sqrt(res.s_hat_sq);
  res.std_error = std::sqrt(res.s_hat_sq / static_cast<double>(res.n));
  double sum = 0.0;
  for (double v : infl.xi) sum += v;
  res.xi_mean = sum / static_cast<double>(res.n);
  if (infl.max_imag_residual > 1e-6 * std::max(1.0, res.s_hat)) {
    res.diagnostics.push_back("influence integral left an imaginary residual of " +
                              std::to_string(infl.max_imag_residual));
  }

  if (res.s_hat_sq == 0.0) {
    if (res.theta_hat != 0.0) {
      throw NumericalError("degenerate variance: every influence value is zero");
    }
    res.diagnostics.push_back(
        "degenerate variance: theta_hat and every influence value are exactly zero");
    res.z = 0.0;
    res.p_value = 0.5;
    res.p_value_two_sided = 1.0;
    res.reject = false;
    return res;
  }
  const auto st = studentize(res.theta_hat, res.std_error, size);
  res.z = st.z;
  res.p_value = st.p_value;
  res.p_value_two_sided = st.p_value_two_sided;
  res.reject = st.reject;
  return res;
}

}  // namespace latentad
