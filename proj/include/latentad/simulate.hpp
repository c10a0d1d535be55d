#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "latentad/estimator.hpp"
#include "latentad/ingest.hpp"
#include "latentad/rng.hpp"
#include "latentad/sample.hpp"

namespace latentad {

/// Draws a sample of size n at regression parameter delta from a stream.
using DgpFn = std::function<Sample(std::size_t n, double delta, CounterRng& rng)>;

/// Baseline design: X*, U, eps, nu i.i.d. N(0,1), Y = (1 - delta) X* + U,
/// X = X* + eps, W = X* + nu. Each observation draws X*, U, eps, nu in that
/// order.
Sample dgp_draw(std::size_t n, double delta, CounterRng& rng);

/// theta_1 = -delta / (2 sqrt(pi)) for the baseline design.
double baseline_theta(double delta);

struct SimConfig {
  std::vector<double> deltas;
  std::vector<std::size_t> n_list;
  std::size_t reps = 0;
  double size = 0.05;
  std::uint64_t seed = 0;
  EstimatorSettings settings;
  std::size_t threads = 1;
  /// Empty: dgp_draw.
  DgpFn dgp;
  /// Lifts the [0, 0.5] restriction on deltas (for user designs).
  bool allow_any_delta = false;
  /// A cell fails when more than this share of replications is excluded.
  double max_exclusion_share = 0.01;

  /// Throws InvalidConfig.
  void validate() const;
};

struct Replication {
  bool completed = false;
  double theta_hat = 0.0;
  double z = 0.0;
  bool reject = false;
  std::string error;  // set when excluded
};

struct PowerRow {
  double delta = 0.0;
  std::size_t n = 0;
  std::size_t reps = 0;
  std::size_t completed = 0;
  std::size_t excluded = 0;
  std::size_t rejections = 0;
  double rejection_frequency = 0.0;  // over completed replications
  double mc_std_error = 0.0;         // sqrt(p (1 - p) / completed)
  double mean_theta = 0.0;
  double sd_theta = 0.0;
  double mean_z = 0.0;
};

struct PowerTable {
  std::vector<PowerRow> rows;  // delta-major, then n, in config order
  std::vector<double> deltas;
  std::vector<std::size_t> n_list;
  double size = 0.05;
  std::uint64_t seed = 0;
  /// `key=value` strings describing the run; written into outputs.
  std::vector<std::string> metadata;
  /// replications[row][rep]
  std::vector<std::vector<Replication>> replications;
};

/// Replication r of cell (delta index i, n index j) draws from
/// CounterRng(seed, r, i, j). Replications run in parallel on cfg.threads
/// workers, each with a single-threaded estimator; the table does not depend
/// on the worker count. Throws NumericalError when a cell excludes more than
/// max_exclusion_share of its replications.
PowerTable run_power_curve(const SimConfig& cfg);

/// The table as CSV (metadata as leading `# ` lines).
std::string power_csv(const PowerTable& table);
/// Line chart: one polyline per n, rejection frequency against delta, and a
/// single horizontal line at the nominal size.
std::string power_svg(const PowerTable& table);

/// Writes `<prefix>_power.csv` and `<prefix>_power.svg`. The table is checked
/// before either file is opened.
void emit_power_outputs(const PowerTable& table, const std::string& path_prefix);

/// Four-wave permanent-transitory income panel with consumption, together
/// with the shocks that generated it. Waves are indexed 0..3.
struct SyntheticPanel {
  PanelTable panel;
  std::vector<std::array<double, 4>> eta;   // permanent shocks, eta[.][0] unused
  std::vector<std::array<double, 4>> tau;   // transitory components
};

struct PanelDesign {
  double income_level = 10.7;
  double income_level_sd = 0.7;
  double eta_mean = 0.08;
  double eta_sd = 0.15;
  double tau_sd = 0.25;
  double consumption_offset = 1.2;
  double mpc_permanent = 0.8;
  double consumption_noise_sd = 0.2;
  /// Share of income and consumption cells blanked at random.
  double missing_rate = 0.0;
};

/// pi_0 ~ N(level, level_sd^2), pi_k = pi_{k-1} + eta_k, income_k = pi_k + tau_k,
/// consumption_k = offset + mpc * pi_k + noise. Stream (seed, 0, 0, 0xFFFFFFFF).
SyntheticPanel synthetic_panel(std::size_t units, std::uint64_t seed,
                               const PanelDesign& design = {},
                               std::array<int, 4> waves = {2013, 2015, 2017, 2019});

}  // namespace latentad
