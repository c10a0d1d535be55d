#include "latentad/simulate.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "latentad/csv.hpp"
#include "latentad/error.hpp"
#include "latentad/inference.hpp"
#include "latentad/parallel.hpp"

namespace latentad {

Sample dgp_draw(std::size_t n, double delta, CounterRng& rng) {
  if (n == 0) throw InvalidConfig("dgp_draw needs n >= 1");
  Sample s;
  s.provenance = Provenance::synthetic;
  s.y.resize(n);
  s.x.resize(n);
  s.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xs = rng.normal();
    const double u = rng.normal();
    const double eps = rng.normal();
    const double nu = rng.normal();
    s.y[i] = (1.0 - delta) * xs + u;
    s.x[i] = xs + eps;
    s.w[i] = xs + nu;
  }
  return s;
}

double baseline_theta(double delta) { return -delta / (2.0 * std::sqrt(std::numbers::pi)); }

void SimConfig::validate() const {
  if (deltas.empty()) throw InvalidConfig("simulation needs at least one delta");
  if (n_list.empty()) throw InvalidConfig("simulation needs at least one sample size");
  if (reps == 0) throw InvalidConfig("reps must be at least 1");
  if (!(size > 0.0 && size < 1.0)) throw InvalidConfig("size must lie in (0, 1)");
  for (double d : deltas) {
    if (!std::isfinite(d)) throw InvalidConfig("delta must be finite");
    if (!allow_any_delta && (d < 0.0 || d > 0.5)) {
      throw InvalidConfig("delta " + csv::format_double(d) + " outside [0, 0.5]");
    }
  }
  for (std::size_t n : n_list) {
    if (n < 2) throw InvalidConfig("sample sizes must be at least 2");
  }
  if (deltas.size() > 0xFFFFFFFFu || n_list.size() > 0xFFFFFFFFu || reps > 0xFFFFFFFFu) {
    throw InvalidConfig("simulation grid too large for the stream counter");
  }
  if (!(max_exclusion_share >= 0.0 && max_exclusion_share <= 1.0)) {
    throw InvalidConfig("max_exclusion_share must lie in [0, 1]");
  }
}

namespace {

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + csv::format_double(v[i]);
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + std::to_string(v[i]);
  return out;
}

std::vector<std::string> describe(const SimConfig& cfg) {
  const auto& s = cfg.settings;
  return {
      "seed=" + std::to_string(cfg.seed),
      "deltas=" + join(cfg.deltas),
      "n_list=" + join(cfg.n_list),
      "reps=" + std::to_string(cfg.reps),
      "size=" + csv::format_double(cfg.size),
      "dgp=" + std::string(cfg.dgp ? "user" : "baseline"),
      "c=" + csv::format_double(s.c),
      "bandwidth=" + (s.bandwidth ? csv::format_double(*s.bandwidth) : std::string("auto")),
      "bandwidth_scale=" + csv::format_double(s.bandwidth_scale),
      "kernel=" + s.kernel.label(),
      "grid_points=" + std::to_string(s.grid_points),
      "rho=" + (s.rho ? csv::format_double(*s.rho) : std::string("auto")),
      "xi_weight=" + to_string(s.xi_weight),
  };
}

}  // namespace

PowerTable run_power_curve(const SimConfig& cfg) {
  cfg.validate();
  const std::size_t nd = cfg.deltas.size(), nn = cfg.n_list.size(), cells = nd * nn;
  const std::size_t tasks = cells * cfg.reps;
  EstimatorSettings settings = cfg.settings;
  settings.threads = 1;
  const DgpFn dgp = cfg.dgp ? cfg.dgp : DgpFn(dgp_draw);

  std::vector<Replication> results(tasks);
  parallel_for(tasks, cfg.threads, [&](std::size_t task) {
    const std::size_t cell = task / cfg.reps, r = task % cfg.reps;
    const std::size_t di = cell / nn, ni = cell % nn;
    CounterRng rng(cfg.seed, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(di),
                   static_cast<std::uint32_t>(ni));
    Replication& out = results[task];
    try {
      const Sample s = dgp(cfg.n_list[ni], cfg.deltas[di], rng);
      const EstimatorConfig ec = resolve_config(settings, s);
      const TestResult t = run_test(s, ec, cfg.size);
      out.completed = true;
      out.theta_hat = t.theta_hat;
      out.z = t.z;
      out.reject = t.reject;
    } catch (const NumericalError& e) {
      out.error = e.what();
    } catch (const InvalidInput& e) {
      out.error = e.what();
    }
  });

  PowerTable table;
  table.deltas = cfg.deltas;
  table.n_list = cfg.n_list;
  table.size = cfg.size;
  table.seed = cfg.seed;
  table.metadata = describe(cfg);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    PowerRow row;
    row.delta = cfg.deltas[cell / nn];
    row.n = cfg.n_list[cell % nn];
    row.reps = cfg.reps;
    std::vector<Replication> reps(results.begin() + static_cast<std::ptrdiff_t>(cell * cfg.reps),
                                  results.begin() +
                                      static_cast<std::ptrdiff_t>((cell + 1) * cfg.reps));
    double sum_t = 0.0, sum_z = 0.0;
    std::string first_error;
    for (const auto& r : reps) {
      if (!r.completed) {
        ++row.excluded;
        if (first_error.empty()) first_error = r.error;
        continue;
      }
      ++row.completed;
      row.rejections += r.reject ? 1 : 0;
      sum_t += r.theta_hat;
      sum_z += r.z;
    }
    if (static_cast<double>(row.excluded) >
        cfg.max_exclusion_share * static_cast<double>(cfg.reps)) {
      throw NumericalError("cell delta=" + csv::format_double(row.delta) +
                           " n=" + std::to_string(row.n) + " excluded " +
                           std::to_string(row.excluded) + " of " + std::to_string(cfg.reps) +
                           " replications; first failure: " + first_error);
    }
    if (row.completed > 0) {
      const double m = static_cast<double>(row.completed);
      row.rejection_frequency = static_cast<double>(row.rejections) / m;
      row.mc_std_error =
          std::sqrt(row.rejection_frequency * (1.0 - row.rejection_frequency) / m);
      row.mean_theta = sum_t / m;
      row.mean_z = sum_z / m;
      if (row.completed > 1) {
        double ss = 0.0;
        for (const auto& r : reps)
          if (r.completed) ss += (r.theta_hat - row.mean_theta) * (r.theta_hat - row.mean_theta);
        row.sd_theta = std::sqrt(ss / (m - 1.0));
      }
    }
    table.rows.push_back(row);
    table.replications.push_back(std::move(reps));
  }
  return table;
}

SyntheticPanel synthetic_panel(std::size_t units, std::uint64_t seed, const PanelDesign& d,
                               std::array<int, 4> waves) {
  if (!(d.missing_rate >= 0.0 && d.missing_rate < 1.0)) {
    throw InvalidConfig("missing_rate must lie in [0, 1)");
  }
  CounterRng rng(seed, 0, 0, 0xFFFFFFFFu);
  SyntheticPanel out;
  out.panel.waves = waves;
  out.panel.validate();
  out.eta.resize(units);
  out.tau.resize(units);
  for (std::size_t j = 0; j < units; ++j) {
    PanelUnit u;
    u.id = "u" + std::to_string(j + 1);
    double pi = d.income_level + d.income_level_sd * rng.normal();
    out.eta[j][0] = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      if (k > 0) {
        out.eta[j][k] = d.eta_mean + d.eta_sd * rng.normal();
        pi += out.eta[j][k];
      }
      out.tau[j][k] = d.tau_sd * rng.normal();
      u.income[k] = pi + out.tau[j][k];
      u.consumption[k] =
          d.consumption_offset + d.mpc_permanent * pi + d.consumption_noise_sd * rng.normal();
    }
    if (d.missing_rate > 0.0) {
      for (std::size_t k = 0; k < 4; ++k) {
        if (rng.uniform() < d.missing_rate) u.income[k].reset();
        if (rng.uniform() < d.missing_rate) u.consumption[k].reset();
      }
    }
    out.panel.units.push_back(std::move(u));
  }
  return out;
}

}  // namespace latentad
