#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "latentad/csv.hpp"
#include "latentad/error.hpp"
#include "latentad/simulate.hpp"
#include "oracles.hpp"

using namespace latentad;
namespace fs = std::filesystem;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PowerTable fake_table(const std::vector<double>& deltas, const std::vector<std::size_t>& ns) {
  PowerTable t;
  t.deltas = deltas;
  t.n_list = ns;
  for (double d : deltas) {
    for (std::size_t n : ns) {
      PowerRow r;
      r.delta = d;
      r.n = n;
      r.reps = r.completed = 100;
      r.rejections = static_cast<std::size_t>(std::lround(100 * std::min(1.0, 0.05 + 2 * d)));
      r.rejection_frequency = r.rejections / 100.0;
      t.rows.push_back(r);
    }
  }
  return t;
}

}  // namespace

TEST_CASE("baseline draw follows the documented draw order and model") {
  CounterRng a(3, 1, 2, 3), b(3, 1, 2, 3);
  const auto s = dgp_draw(50, 0.3, a);
  CHECK(s.provenance == Provenance::synthetic);
  for (std::size_t i = 0; i < 50; ++i) {
    const double xs = b.normal(), u = b.normal(), e = b.normal(), v = b.normal();
    CHECK(s.y[i] == 0.7 * xs + u);
    CHECK(s.x[i] == xs + e);
    CHECK(s.w[i] == xs + v);
  }
  CHECK_THROWS_AS(dgp_draw(0, 0.0, a), InvalidConfig);
}

TEST_CASE("baseline target matches quadrature") {
  for (double d : {0.0, 0.1, 0.3, 0.5}) {
    CHECK(std::abs(baseline_theta(d) - oracle::theta_target(d)) <= 1e-12);
  }
  CHECK(baseline_theta(0.3) == doctest::Approx(-0.08463).epsilon(1e-4));
}

TEST_CASE("configuration checks") {
  SimConfig c;
  c.deltas = {0.0};
  c.n_list = {50};
  c.reps = 0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c.reps = 2;
  CHECK_NOTHROW(c.validate());
  c.deltas = {0.7};
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c.allow_any_delta = true;
  CHECK_NOTHROW(c.validate());
  c.deltas = {};
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c.deltas = {0.1};
  c.n_list = {};
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c.n_list = {1};
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c.n_list = {50};
  c.size = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
}

TEST_CASE("power curve rows, frequencies and determinism") {
  SimConfig c;
  c.deltas = {0.0, 0.5};
  c.n_list = {60, 80};
  c.reps = 12;
  c.seed = 5;
  const auto t = run_power_curve(c);
  REQUIRE(t.rows.size() == 4);
  CHECK(t.rows[0].delta == 0.0);
  CHECK(t.rows[0].n == 60);
  CHECK(t.rows[1].n == 80);
  CHECK(t.rows[2].delta == 0.5);
  for (const auto& r : t.rows) {
    CHECK(r.completed + r.excluded == r.reps);
    CHECK(r.rejection_frequency >= 0.0);
    CHECK(r.rejection_frequency <= 1.0);
    const double p = r.rejection_frequency;
    CHECK(r.mc_std_error == doctest::Approx(std::sqrt(p * (1 - p) / r.completed)));
  }
  c.threads = 3;
  const auto t3 = run_power_curve(c);
  CHECK(power_csv(t) == power_csv(t3));
  CHECK(power_svg(t) == power_svg(t3));

  // A replication depends only on (seed, rep, delta index, n index).
  SimConfig one = c;
  one.deltas = {0.0};
  one.n_list = {60};
  const auto t1 = run_power_curve(one);
  for (std::size_t r = 0; r < c.reps; ++r) {
    CHECK(t1.replications[0][r].theta_hat == t.replications[0][r].theta_hat);
  }
}

TEST_CASE("failed replications are excluded and counted") {
  SimConfig c;
  c.deltas = {0.0};
  c.n_list = {40};
  c.reps = 30;
  c.dgp = [](std::size_t n, double delta, CounterRng& rng) {
    if (rng.uniform() < 0.3) throw NumericalError("synthetic failure");
    return dgp_draw(n, delta, rng);
  };
  CHECK_THROWS_AS(run_power_curve(c), NumericalError);
  c.max_exclusion_share = 0.9;
  const auto t = run_power_curve(c);
  CHECK(t.rows[0].excluded > 0);
  CHECK(t.rows[0].completed + t.rows[0].excluded == 30);
  for (const auto& r : t.replications[0]) {
    if (!r.completed) CHECK(r.error == "synthetic failure");
  }
  CHECK(power_csv(t).find("# dgp=user") != std::string::npos);
}

TEST_CASE("emitted CSV and SVG") {
  const auto dir = fs::temp_directory_path() / "latentad_power_test";
  fs::create_directories(dir);
  const auto prefix = (dir / "two").string();
  auto t = fake_table({0.0, 0.5}, {250});
  t.metadata = {"seed=1"};
  emit_power_outputs(t, prefix);
  const auto table = csv::read(prefix + "_power.csv");
  CHECK(table.rows.size() == 2);
  CHECK(table.header[0] == "delta");
  CHECK(table.header[6] == "rejection_frequency");
  CHECK(slurp(prefix + "_power.csv").rfind("# seed=1\n", 0) == 0);

  const auto full = fake_table({0.0, 0.1, 0.2, 0.3, 0.4, 0.5}, {250, 500});
  const std::string svg = power_svg(full);
  CHECK(count(svg, "<polyline") == 2);
  CHECK(count(svg, "<line ") == 1);
  CHECK(svg.rfind("<svg", 0) == 0);

  const auto empty_prefix = (dir / "empty").string();
  PowerTable empty;
  empty.n_list = {250};
  CHECK_THROWS_AS(emit_power_outputs(empty, empty_prefix), InvalidInput);
  CHECK_FALSE(fs::exists(empty_prefix + "_power.csv"));
  CHECK_FALSE(fs::exists(empty_prefix + "_power.svg"));

  CHECK_THROWS_AS(emit_power_outputs(t, (dir / "missing" / "x").string()), InvalidInput);
  fs::remove_all(dir);
}

TEST_CASE("synthetic panel carries the permanent-transitory structure") {
  const auto sp = synthetic_panel(200, 17);
  REQUIRE(sp.panel.units.size() == 200);
  const auto [s, rep] = build_differences(sp.panel);
  CHECK(rep.dropped == 0);
  for (std::size_t j = 0; j < s.size(); ++j) {
    const auto& e = sp.eta[j];
    const auto& tau = sp.tau[j];
    // waves 0..3 are t-2, t-1, t, t+1
    const double expected = (e[1] + tau[2] - tau[0]) - (e[3] + tau[3] - tau[1]);
    CHECK(s.x[j] - s.w[j] == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
  }
  PanelDesign d;
  d.missing_rate = 0.05;
  const auto holes = synthetic_panel(400, 18, d);
  const auto [s2, rep2] = build_differences(holes.panel);
  CHECK(rep2.dropped > 0);
  CHECK(rep2.retained + rep2.dropped == 400);
  d.missing_rate = 1.0;
  CHECK_THROWS_AS(synthetic_panel(5, 1, d), InvalidConfig);
}
