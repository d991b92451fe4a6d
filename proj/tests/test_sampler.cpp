#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "effdyn/errors.hpp"
#include "effdyn/oracle.hpp"
#include "effdyn/quadrature.hpp"
#include "effdyn/sampler.hpp"
#include "effdyn/stats.hpp"
#include "effdyn/systems.hpp"
#include "support/test_stats.hpp"

using namespace effdyn;

namespace {

Vec vec1(double a) { return Vec::Constant(1, a); }

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("em step is pure drift without noise") {
  const BuiltinSystem sys = make_builtin("ou2d");
  const Vec next = em_step(sys.spec, vec2(1.0, 0.0), 0.01, Vec::Zero(2));
  CHECK(next[0] == doctest::Approx(0.99));
  CHECK(next[1] == doctest::Approx(0.0));
}

TEST_CASE("zero steps return the start state") {
  const BuiltinSystem sys = make_builtin("ou2d");
  IntegratorConfig cfg;
  cfg.n_steps = 0;
  cfg.seed = 1;
  long count = 0;
  simulate_full(sys.spec, cfg, {X0Source::Mode::Fixed, vec2(0.4, -0.2)},
                [&](int, long, double t, const Vec& x, const Vec&) {
                  ++count;
                  CHECK(t == 0.0);
                  CHECK(x[0] == 0.4);
                  CHECK(x[1] == -0.2);
                });
  CHECK(count == 1);
}

TEST_CASE("same seed gives bitwise identical trajectories") {
  const BuiltinSystem sys = make_builtin("case2-linear");
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_steps = 2000;
  cfg.n_replicas = 2;
  cfg.seed = 99;
  cfg.thinning = 50;

  std::vector<Vec> first, second;
  simulate_full(sys.spec, cfg, {X0Source::Mode::Equilibrium, sys.x_init},
                [&](int, long, double, const Vec& x, const Vec&) {
                  first.push_back(x);
                });
  simulate_full(sys.spec, cfg, {X0Source::Mode::Equilibrium, sys.x_init},
                [&](int, long, double, const Vec& x, const Vec&) {
                  second.push_back(x);
                });
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i)
    CHECK((first[i] - second[i]).norm() == 0.0);
}

TEST_CASE("ou stationary variance at small dt") {
  const BuiltinSystem sys = make_builtin("ou2d");
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_replicas = 100;
  cfg.n_steps = 400000;
  cfg.burn_in_steps = 10000;
  cfg.thinning = 40;
  cfg.seed = 2024;

  RunningStats v0, v1;
  simulate_full(sys.spec, cfg, {X0Source::Mode::Equilibrium, sys.x_init},
                [&](int, long rec, double, const Vec& x, const Vec&) {
                  if (rec == 0) return;
                  v0.add(x[0]);
                  v1.add(x[1]);
                });
  CHECK(v0.count() == 1000000);
  CHECK(v0.variance() > 0.97);
  CHECK(v0.variance() < 1.03);
  CHECK(v1.variance() > 0.97);
  CHECK(v1.variance() < 1.03);
}

TEST_CASE("ou autocovariance decays at the potential rate") {
  const BuiltinSystem sys = make_builtin("ou2d");
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_replicas = 8;
  cfg.n_steps = 750000;
  cfg.burn_in_steps = 10000;
  cfg.thinning = 1;
  cfg.seed = 555;

  std::vector<std::vector<double>> series(cfg.n_replicas);
  simulate_full(sys.spec, cfg, {X0Source::Mode::Equilibrium, sys.x_init},
                [&](int replica, long rec, double, const Vec& x, const Vec&) {
                  if (rec == 0) return;
                  series[replica].push_back(x[0]);
                });

  for (int lag : {100, 500, 1000}) {
    double num = 0.0, den = 0.0;
    for (const auto& s : series) {
      num += autocovariance(s, lag);
      den += autocovariance(s, 0);
    }
    const double expected = std::exp(-lag * cfg.dt);
    CHECK(std::abs(num / den - expected) <= 0.05 * expected);
  }
}

TEST_CASE("equilibrium time average of the slow coordinate") {
  const BuiltinSystem sys = make_builtin("case2-linear");
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_replicas = 16;
  cfg.n_steps = 250000;
  cfg.burn_in_steps = 10000;
  cfg.thinning = 25;
  cfg.seed = 77;

  std::vector<double> xi_series;
  simulate_full(sys.spec, cfg, {X0Source::Mode::Equilibrium, sys.x_init},
                [&](int, long rec, double, const Vec&, const Vec& z) {
                  if (rec > 0) xi_series.push_back(z[0]);
                });
  double mean = 0.0;
  for (double v : xi_series) mean += v;
  mean /= static_cast<double>(xi_series.size());
  const double se = batch_means_stderror(xi_series, 64);
  CHECK(std::abs(mean) <= 3.0 * se);
}

TEST_CASE("radial occupation histogram matches the quadrature marginal") {
  const BuiltinSystem sys = make_builtin("radial2d");
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_replicas = 10;
  cfg.n_steps = 4000000;
  cfg.burn_in_steps = 8000;
  cfg.thinning = 4000;
  cfg.seed = 31;

  const int n_bins = 20;
  const double lo = 0.2, hi = 2.6;
  const double width = (hi - lo) / n_bins;
  std::vector<long> observed(n_bins, 0);
  long total = 0, outside = 0;
  simulate_full(sys.spec, cfg, {X0Source::Mode::Equilibrium, sys.x_init},
                [&](int, long rec, double, const Vec&, const Vec& z) {
                  if (rec == 0) return;
                  ++total;
                  const int b = static_cast<int>((z[0] - lo) / width);
                  if (z[0] < lo || b >= n_bins) {
                    ++outside;
                    return;
                  }
                  ++observed[b];
                });

  // Expected occupancy from the deterministic marginal.
  const double z_norm = adaptive_simpson(
      [&](double r) { return fiber_mass(sys.spec, *sys.chart, vec1(r)); },
      sys.z_wide_lo[0], sys.z_wide_hi[0], 1e-10);
  double chi2 = 0.0;
  double p_inside = 0.0;
  for (int b = 0; b < n_bins; ++b) {
    const double p = adaptive_simpson(
                         [&](double r) {
                           return fiber_mass(sys.spec, *sys.chart, vec1(r));
                         },
                         lo + b * width, lo + (b + 1) * width, 1e-10) /
                     z_norm;
    p_inside += p;
    const double expected = p * static_cast<double>(total);
    chi2 += (observed[b] - expected) * (observed[b] - expected) / expected;
  }
  // The outside mass gets its own cell so the multinomial is complete.
  const double expected_outside = (1.0 - p_inside) * static_cast<double>(total);
  chi2 += (outside - expected_outside) * (outside - expected_outside) /
          expected_outside;
  CHECK(testsupport::chi2_pvalue(chi2, n_bins) > 0.01);
}

TEST_CASE("fiber projection basics") {
  const BuiltinSystem radial = make_builtin("radial2d");
  // Already on the fiber: unchanged.
  const Vec on = vec2(std::sqrt(0.5), std::sqrt(0.5));
  CHECK((project_to_fiber(radial.spec, on, vec1(1.0), 1e-10, 10) - on).norm() ==
        0.0);
  // Radial retraction is exact.
  const Vec proj =
      project_to_fiber(radial.spec, vec2(1.1, 0.0), vec1(1.0), 1e-10, 10);
  CHECK(std::abs(proj[0] - 1.0) < 1e-10);
  CHECK(std::abs(proj[1]) < 1e-15);

  // Linear coordinate: one Newton step, exact.
  const BuiltinSystem lin = make_builtin("ou2d");
  const Vec lp =
      project_to_fiber(lin.spec, vec2(0.7, 0.331), vec1(0.0), 1e-12, 10);
  CHECK(std::abs(lp[0]) < 1e-14);
  CHECK(lp[1] == 0.331);

  // Unreachable tolerance reports a projection error.
  CHECK_THROWS_AS(
      project_to_fiber(radial.spec, vec2(1.3, 0.4), vec1(1.0), 1e-30, 3),
      ProjectionError);
}

TEST_CASE("fiber dynamics freezes a linear coordinate exactly") {
  const BuiltinSystem sys = make_builtin("ou2d");
  FiberConfig fc;
  fc.z = vec1(0.25);
  fc.start = vec2(0.25, 1.4);
  fc.base.dt = 1e-3;
  fc.base.n_steps = 5000;
  fc.base.thinning = 100;
  fc.base.seed = 12;
  fc.base.burn_in_steps = 0;

  simulate_fiber(sys.spec, fc,
                 [&](int, long, double, const Vec& x, const Vec&) {
                   CHECK(x[0] == 0.25);  // exactly frozen
                 });
}

TEST_CASE("fiber samples reproduce the conditional gaussian") {
  const BuiltinSystem sys = make_builtin("case2-linear");
  FiberConfig fc;
  fc.z = vec1(0.7);
  fc.start = vec2(0.7, 0.0);
  fc.base.dt = 2e-3;
  fc.base.n_steps = 400000;
  fc.base.thinning = 200;
  fc.base.burn_in_steps = 5000;
  fc.base.seed = 8;

  std::vector<double> ys;
  double max_violation = 0.0;
  simulate_fiber(sys.spec, fc,
                 [&](int, long, double, const Vec& x, const Vec& z) {
                   ys.push_back(x[1]);
                   max_violation = std::max(max_violation, std::abs(z[0] - 0.7));
                 });
  CHECK(max_violation <= fc.newton_tol);

  double mean = 0.0;
  for (double y : ys) mean += y;
  mean /= static_cast<double>(ys.size());
  double var = 0.0;
  for (double y : ys) var += (y - mean) * (y - mean);
  var /= static_cast<double>(ys.size() - 1);

  const double se_mean = batch_means_stderror(ys, 40);
  CHECK(std::abs(mean - 0.7) <= 3.0 * se_mean);
  // y | z is N(z, 1/beta); EM at this dt biases the variance by O(dt).
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("radial fiber is uniform in angle") {
  const BuiltinSystem sys = make_builtin("radial2d");
  FiberConfig fc;
  fc.z = vec1(1.0);
  fc.start = vec2(1.0, 0.0);
  fc.base.dt = 1e-3;
  fc.base.n_steps = 400000;
  fc.base.thinning = 2000;
  fc.base.burn_in_steps = 20000;
  fc.base.seed = 4;

  std::vector<double> unit;
  double max_violation = 0.0;
  simulate_fiber(sys.spec, fc,
                 [&](int, long, double, const Vec& x, const Vec& z) {
                   max_violation = std::max(max_violation, std::abs(z[0] - 1.0));
                   const double angle = std::atan2(x[1], x[0]);
                   unit.push_back((angle + std::numbers::pi) /
                                  (2.0 * std::numbers::pi));
                 });
  CHECK(max_violation <= fc.newton_tol);
  CHECK(unit.size() == 200);
  CHECK(testsupport::ks_uniform_pvalue(unit) > 0.01);
}
