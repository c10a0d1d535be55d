// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "latentad/estimator.hpp"
#include "latentad/inference.hpp"
#include "latentad/ingest.hpp"
#include "latentad/simulate.hpp"
#include "oracles.hpp"

using namespace latentad;

namespace {

// Fixed before any acceptance run.
constexpr std::uint64_t kPowerSeed = 20240601;
constexpr std::uint64_t kConsistencySeed = 20240602;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SimConfig power_config(std::size_t threads) {
  SimConfig cfg;
  cfg.deltas = {0.0, 0.5};
  cfg.n_list = {250, 500};
  cfg.reps = 500;
  cfg.size = 0.05;
  cfg.seed = kPowerSeed;
  cfg.threads = threads;
  return cfg;
}

SimConfig consistency_config(std::size_t threads) {
  SimConfig cfg;
  cfg.deltas = {0.3};
  cfg.n_list = {2000};
  cfg.reps = 200;
  cfg.seed = kConsistencySeed;
  cfg.threads = threads;
  return cfg;
}

const PowerRow& row(const PowerTable& t, double delta, std::size_t n) {
  for (const auto& r : t.rows) {
    if (r.delta == delta && r.n == n) return r;
  }
  throw std::runtime_error("missing power cell");
}

PowerTable power_table;
PowerTable consistency_table;

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::uint32_t r = 0; r < 20; ++r) {
    CounterRng rng(777, r, 0, 0);
    const auto s = dgp_draw(30, 0.3, rng);
    EstimatorSettings st;
    st.c = r % 2 ? 0.0 : 1.0;
    const auto cfg = resolve_config(st, s);
    const double fast = estimate_theta(s, cfg).theta_hat;
    const double direct = estimate_theta_direct(s, cfg).theta_hat;
    worst = std::max(worst, std::abs(fast - direct) / std::max(std::abs(direct), 1e-300));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 30.0,
          fmt("worst relative gap %.2e (limit 1e-6), %.1f s (limit 30 s)", worst, secs)};
}

Outcome size_control() {
  const auto t0 = Clock::now();
  power_table = run_power_curve(power_config(1));
  const auto& r = row(power_table, 0.0, 250);
  const bool ok = r.rejection_frequency >= 0.03 && r.rejection_frequency <= 0.08;
  return {ok, fmt("delta 0, n 250: %.3f over %zu reps (band [0.03, 0.08]), %zu excluded, %.0f s",
                  r.rejection_frequency, r.completed, r.excluded, seconds_since(t0))};
}

Outcome power_ordering() {
  const auto& a250 = row(power_table, 0.5, 250);
  const auto& a500 = row(power_table, 0.5, 500);
  const auto& n250 = row(power_table, 0.0, 250);
  const auto& n500 = row(power_table, 0.0, 500);
  auto margin = [](const PowerRow& alt, const PowerRow& null) {
    const double se = std::hypot(alt.mc_std_error, null.mc_std_error);
    return (alt.rejection_frequency - null.rejection_frequency) / se;
  };
  const double m250 = margin(a250, n250);
  const double m500 = margin(a500, n500);
  const bool ok = a500.rejection_frequency > a250.rejection_frequency && m250 >= 5.0 && m500 >= 5.0;
  return {ok, fmt("delta 0.5: %.3f (n 250) vs %.3f (n 500); gap over delta 0 in MC se: %.1f, %.1f",
                  a250.rejection_frequency, a500.rejection_frequency, m250, m500)};
}

Outcome consistency() {
  const auto t0 = Clock::now();
  consistency_table = run_power_curve(consistency_config(1));
  const auto& r = consistency_table.rows.at(0);
  const double target = oracle::theta_target(0.3);
  return {std::abs(r.mean_theta - target) <= 0.03,
          fmt("mean theta %.4f vs target %.4f over %zu reps (tolerance 0.03), %.0f s", r.mean_theta,
              target, r.completed, seconds_since(t0))};
}

Outcome kotlarski_recovery() {
  CounterRng rng(4242, 0, 0, 0);
  Sample s;
  for (std::size_t i = 0; i < 100000; ++i) {
    const double xs = rng.normal(), e = rng.normal(), v = rng.normal();
    s.y.push_back(xs);
    s.x.push_back(xs + e);
    s.w.push_back(xs + v);
  }
  const FreqGrid g(2.0, 401);
  const auto cfs = estimate_charfuns(s, 1.0, g);
  double sup = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    sup = std::max(sup, std::abs(cfs.feps_ft[i] - std::exp(-0.5 * g[i] * g[i])));
  }
  return {sup <= 0.05, fmt("sup error on |t| <= 2: %.4f (limit 0.05)", sup)};
}

Outcome known_error_reduction() {
  CounterRng rng(555, 0, 0, 0);
  Sample s;
  for (std::size_t i = 0; i < 500; ++i) {
    const double xs = rng.normal(), u = rng.normal();
    s.y.push_back(xs + u);
    s.x.push_back(xs);
    s.w.push_back(xs);
  }
  EstimatorSettings st;
  st.c = 0.0;
  const auto cfg = resolve_config(st, s);
  const double theta =
      estimate_theta_known_error(s, cfg, [](double) { return cplx(1.0); }).theta_hat;
  const double pss = oracle::pss_estimate(s.y, s.x, cfg.bandwidth.value());
  return {std::abs(theta - pss) <= 1e-3,
          fmt("theta %.6f vs independent PSS %.6f, gap %.2e (limit 1e-3)", theta, pss,
              std::abs(theta - pss))};
}

Outcome influence_nullity() {
  const double delta = 0.3, c = 1.0 - delta;
  CounterRng rng(31, 0, 0, 0);
  const auto s = dgp_draw(500, delta, rng);
  EstimatorSettings st;
  st.c = c;
  const auto cfg = resolve_config(st, s);
  const auto cfs =
      charfuns_from_truth(oracle::linear_truth(delta, c), c, cfg.grid, cfg.rho, s.size());
  const auto iv = xi_hat_all(s, cfs, cfg);
  double worst = 0.0;
  for (double v : iv.branch2) worst = std::max(worst, std::abs(v));
  return {worst <= 1e-6,
          fmt("max |branch 2| over %zu observations: %.2e (limit 1e-6)", s.size(), worst)};
}

Outcome application_numbers() {
  const auto st = studentize(-0.0607, 0.0052, 0.05);
  const bool arithmetic = st.reject && std::abs(st.z + 0.0607 / 0.0052) < 1e-12 && st.p_value < 0.05;

  const std::string path = std::string(LATENTAD_TEST_DATA) + "/panel_synthetic.csv";
  const auto panel = parse_panel_csv(path, PanelSchema::with_prefixes({2013, 2015, 2017, 2019}));
  const auto [sample, report] = build_differences(panel);
  const auto diffs = summary_stats(sample);
  const auto levels = summary_stats(panel);
  bool shaped = diffs.rows.size() == 3 && levels.rows.size() == 8 &&
                report.retained == sample.size() && report.retained + report.dropped == report.units;
  for (const auto& r : diffs.rows) {
    shaped = shaped && r.n == sample.size() && std::isfinite(r.mean) && r.sd > 0.0;
  }
  const std::string text = diffs.to_text();
  shaped = shaped && text.find('(') != std::string::npos;
  return {arithmetic && shaped,
          fmt("z %.3f, p %.2e, reject %s; synthetic panel %zu of %zu units kept, %zu summary rows",
              st.z, st.p_value, st.reject ? "yes" : "no", report.retained, report.units,
              diffs.rows.size() + levels.rows.size())};
}

Outcome determinism() {
  const auto t0 = Clock::now();
  const std::string power_ref = power_csv(power_table);
  const std::string cons_ref = power_csv(consistency_table);
  bool ok = true;
  std::string detail;
  for (std::size_t threads : {4u, 8u}) {
    const bool p = power_csv(run_power_curve(power_config(threads))) == power_ref;
    const bool c = power_csv(run_power_curve(consistency_config(threads))) == cons_ref;
    ok = ok && p && c;
    detail += fmt("%zu threads: %s; ", threads, p && c ? "identical" : "DIFFERENT");
  }
  return {ok, detail + fmt("%.0f s", seconds_since(t0))};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"fast and direct estimators agree", oracle_equivalence},
      {"size control at delta 0", size_control},
      {"power ordering at delta 0.5", power_ordering},
      {"consistency to the analytic target", consistency},
      {"error CF recovery", kotlarski_recovery},
      {"known-error reduction to PSS", known_error_reduction},
      {"branch 2 vanishes in the symmetric design", influence_nullity},
      {"application arithmetic and panel summary", application_numbers},
      {"byte-identical outputs across thread counts", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
