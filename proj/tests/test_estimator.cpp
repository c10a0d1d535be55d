#include <doctest.h>

#include <cmath>

#include "latentad/error.hpp"
#include "latentad/estimator.hpp"
#include "latentad/simulate.hpp"
#include "oracles.hpp"

using namespace latentad;

namespace {

Sample draw(std::size_t n, double delta, std::uint32_t stream) {
  CounterRng rng(1234, stream, 0, 0);
  return dgp_draw(n, delta, rng);
}

Sample error_free(std::size_t n, double delta, std::uint32_t stream) {
  CounterRng rng(99, stream, 0, 0);
  Sample s;
  for (std::size_t i = 0; i < n; ++i) {
    const double xs = rng.normal();
    const double u = rng.normal();
    s.y.push_back((1.0 - delta) * xs + u);
    s.x.push_back(xs);
    s.w.push_back(xs);
  }
  return s;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("resolve_config fills bandwidth, floor and grid") {
  const auto s = draw(500, 0.0, 1);
  const auto cfg = resolve_config({}, s);
  CHECK(cfg.bandwidth.value() ==
        doctest::Approx(sample_sd(s.x) * std::pow(500.0, -1.0 / 6.0)));
  CHECK(cfg.rho == doctest::Approx(1.0 / std::sqrt(500.0)));
  CHECK(cfg.grid.size() == 4097);
  CHECK(cfg.grid.t_max() == doctest::Approx(1.0 / cfg.bandwidth.value()));
  EstimatorSettings st;
  st.bandwidth = 0.4;
  st.rho = 0.01;
  st.grid_points = 1025;
  const auto c2 = resolve_config(st, s);
  CHECK(c2.bandwidth.value() == 0.4);
  CHECK(c2.rho == 0.01);
  CHECK(c2.grid.size() == 1025);
  st.bandwidth = -1.0;
  CHECK_THROWS_AS(resolve_config(st, s), InvalidConfig);
  st.bandwidth.reset();
  st.grid_points = 1024;
  CHECK_THROWS_AS(resolve_config(st, s), InvalidConfig);
  CHECK_THROWS_AS(resolve_config({}, Sample{{1.0}, {1.0}, {1.0}}), InvalidInput);
}

TEST_CASE("Y = cW gives exactly zero on every path") {
  auto s = draw(40, 0.2, 2);
  const double c = 0.8;
  for (std::size_t i = 0; i < s.size(); ++i) s.y[i] = c * s.w[i];
  EstimatorSettings st;
  st.c = c;
  const auto cfg = resolve_config(st, s);
  CHECK(estimate_theta(s, cfg).theta_hat == 0.0);
  CHECK(estimate_theta_direct(s, cfg).theta_hat == 0.0);
  CHECK(estimate_theta_known_error(s, cfg, [](double t) { return cplx(std::exp(-0.5 * t * t)); })
            .theta_hat == 0.0);
}

TEST_CASE("frequency path matches the literal double sum") {
  for (std::uint32_t r = 0; r < 4; ++r) {
    const auto s = draw(r % 2 ? 50 : 30, 0.3, 10 + r);
    EstimatorSettings st;
    st.c = r < 2 ? 1.0 : 0.0;
    const auto cfg = resolve_config(st, s);
    const auto fast = estimate_theta(s, cfg);
    const auto direct = estimate_theta_direct(s, cfg);
    CHECK(rel(fast.theta_hat, direct.theta_hat) <= 1e-6);
    CHECK(fast.imag_residual <= 1e-6 * std::max(1.0, std::abs(fast.theta_hat)));
  }
}

TEST_CASE("second-order kernel also matches the double sum") {
  const auto s = draw(30, 0.3, 20);
  EstimatorSettings st;
  st.kernel = KernelSpec::polynomial2();
  const auto cfg = resolve_config(st, s);
  CHECK(rel(estimate_theta(s, cfg).theta_hat, estimate_theta_direct(s, cfg).theta_hat) <= 1e-6);
}

TEST_CASE("direct path: window convergence and size guard") {
  const auto s = draw(30, 0.3, 21);
  const auto cfg = resolve_config({}, s);
  DirectOptions narrow, wide;
  wide.reach = 1500.0;
  const double a = estimate_theta_direct(s, cfg, narrow).theta_hat;
  const double b = estimate_theta_direct(s, cfg, wide).theta_hat;
  CHECK(rel(a, b) <= 1e-6);
  const auto big = draw(201, 0.3, 22);
  CHECK_THROWS_AS(estimate_theta_direct(big, resolve_config({}, big)), InvalidInput);
}

TEST_CASE("c = 0 statistic is translation invariant") {
  auto s = draw(400, 0.3, 23);
  EstimatorSettings st;
  st.c = 0.0;
  const auto cfg = resolve_config(st, s);
  const double a = estimate_theta(s, cfg).theta_hat;
  for (auto& v : s.x) v += 2.5;
  for (auto& v : s.w) v += 2.5;
  const double b = estimate_theta(s, resolve_config(st, s)).theta_hat;
  CHECK(rel(b, a) <= 1e-6);
}

TEST_CASE("known unit error CF reduces to Powell-Stock-Stoker with K*K") {
  const auto s = error_free(500, 0.0, 1);
  EstimatorSettings st;
  st.c = 0.0;
  const auto cfg = resolve_config(st, s);
  const double b = cfg.bandwidth.value();
  const double theta = estimate_theta_known_error(s, cfg, [](double) { return cplx(1.0); }).theta_hat;
  const double pss = oracle::pss_estimate(s.y, s.x, b);
  // The diagonal terms vanish since L'(0) = 0; only the 1/n^2 versus
  // 1/(n(n-1)) normalisation differs.
  CHECK(rel(theta, pss * 499.0 / 500.0) <= 1e-6);
  CHECK(std::abs(theta - pss) <= 1e-3);
  // Estimated error CF on error-free data.
  CHECK(std::abs(estimate_theta(s, cfg).theta_hat - pss) <= 1e-3);
}

TEST_CASE("doubling the grid moves theta by less than 1e-4") {
  const auto s = draw(500, 0.3, 24);
  EstimatorSettings st;
  const double a = estimate_theta(s, resolve_config(st, s)).theta_hat;
  st.grid_points = 8193;
  const double b = estimate_theta(s, resolve_config(st, s)).theta_hat;
  CHECK(std::abs(a - b) < 1e-4);
}

TEST_CASE("thread count does not change theta") {
  const auto s = draw(700, 0.3, 25);
  EstimatorSettings st;
  const double a = estimate_theta(s, resolve_config(st, s)).theta_hat;
  st.threads = 3;
  const double b = estimate_theta(s, resolve_config(st, s)).theta_hat;
  CHECK(a == b);
}

TEST_CASE("mean of theta_hat near the analytic target at n = 10^4") {
  const double target = oracle::theta_target(0.3);
  CHECK(target == doctest::Approx(-0.08463).epsilon(1e-4));
  double sum_est = 0.0, sum_known = 0.0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    const auto s = draw(10000, 0.3, 1000 + r);
    const auto cfg = resolve_config({}, s);
    sum_est += estimate_theta(s, cfg).theta_hat;
    sum_known +=
        estimate_theta_known_error(s, cfg, [](double t) { return cplx(std::exp(-0.5 * t * t)); })
            .theta_hat;
  }
  MESSAGE("estimated CF mean " << sum_est / reps << ", known CF mean " << sum_known / reps
                               << ", target " << target);
  CHECK(std::abs(sum_est / reps - target) <= 0.02);
  CHECK(std::abs(sum_known / reps - target) <= 0.02);
}

TEST_CASE("sign at delta = 0 and delta > 0") {
  double m0 = 0.0, m5 = 0.0;
  const int reps = 40;
  for (int r = 0; r < reps; ++r) {
    const auto a = draw(500, 0.0, 2000 + r);
    const auto b = draw(500, 0.5, 3000 + r);
    m0 += estimate_theta(a, resolve_config({}, a)).theta_hat / reps;
    m5 += estimate_theta(b, resolve_config({}, b)).theta_hat / reps;
  }
  CHECK(m5 < 0.0);
  // sd of theta_hat at n = 500 is about 0.023
  CHECK(std::abs(m0) < 3.0 * 0.023 / std::sqrt(reps));
}
