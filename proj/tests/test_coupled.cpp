#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "effdyn/coupled.hpp"
#include "effdyn/errors.hpp"
#include "effdyn/oracle.hpp"
#include "effdyn/rng.hpp"
#include "effdyn/systems.hpp"

using namespace effdyn;

namespace {

Vec vec1(double a) { return Vec::Constant(1, a); }

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ZGrid grid1(double lo, double hi, int n) {
  return ZGrid(vec1(lo), vec1(hi), {n});
}

EffectiveModel toy_model(double z_lo, double z_hi, int n) {
  // b(z) = -z, sigma = 1, synthetic Q; used where the coefficients are known
  // and the invariant checks are not the point.
  EffectiveModel model;
  model.grid = grid1(z_lo, z_hi, n);
  model.m = 1;
  const long total = model.grid.size();
  model.b.assign(total, Vec::Zero(1));
  model.phi_mean.assign(total, Mat::Identity(1, 1));
  model.sigma_node.assign(total, Mat::Identity(1, 1));
  model.Q.assign(total, 0.0);
  model.count.assign(total, 1);
  model.missing.assign(total, 0);
  for (long k = 0; k < total; ++k) model.b[k][0] = -model.grid.node(k)[0];
  return model;
}

}  // namespace

TEST_CASE("coupled increment for a linear coordinate selects leading noise") {
  const BuiltinSystem sys = make_builtin("ou2d");
  const Vec dw = vec2(0.31, -0.87);
  const Vec out = coupled_noise_increment(sys.spec, vec2(0.2, 0.5), dw);
  CHECK(out.size() == 1);
  CHECK(out[0] == doctest::Approx(0.31).epsilon(1e-12));
}

TEST_CASE("coupled increment for the radius is the radial projection") {
  const BuiltinSystem sys = make_builtin("radial2d");
  const Vec x = vec2(0.6, 0.8);
  const Vec dw = vec2(1.0, -2.0);
  const Vec out = coupled_noise_increment(sys.spec, x, dw);
  const Vec unit = x / x.norm();
  CHECK(out[0] == doctest::Approx(unit.dot(dw)).epsilon(1e-12));
  // The mixing row has unit norm, so the increment is standard.
  CHECK(unit.norm() == doctest::Approx(1.0));
}

TEST_CASE("quadratic covariation of the derived noise is brownian") {
  // Along a full trajectory, sum dw~ dw~^T over 1e5 steps: expect t I_m
  // within 3 standard errors (per entry, se = sqrt(2N) dt^2 diag / N dt ...).
  const BuiltinSystem sys = make_builtin("twist3d");
  const double dt = 1e-3;
  const long n_steps = 100000;
  NoiseStream noise(2718, 0);
  Vec x = sys.x_init;
  Vec dW(3);
  Mat qv = Mat::Zero(2, 2);
  for (long k = 0; k < n_steps; ++k) {
    noise.fill_normals(static_cast<std::uint64_t>(k),
                       {dW.data(), static_cast<std::size_t>(dW.size())});
    dW *= std::sqrt(dt);
    const Vec dwt = coupled_noise_increment(sys.spec, x, dW);
    qv += dwt * dwt.transpose();
    x = em_step(sys.spec, x, dt, dW, k);
  }
  const double t = n_steps * dt;
  // Var of each diagonal accumulation is 2 N dt^2; off-diagonals N dt^2.
  const double se_diag = std::sqrt(2.0 * n_steps) * dt;
  const double se_off = std::sqrt(1.0 * n_steps) * dt;
  CHECK(std::abs(qv(0, 0) - t) <= 3.0 * se_diag);
  CHECK(std::abs(qv(1, 1) - t) <= 3.0 * se_diag);
  CHECK(std::abs(qv(0, 1)) <= 3.0 * se_off);
  CHECK(std::abs(qv(1, 0) - qv(0, 1)) == 0.0);
}

TEST_CASE("shared start means zero error at time zero") {
  const BuiltinSystem sys = make_builtin("case2-linear");
  const EffectiveModel model = quadrature_oracle(sys, grid1(-3.5, 3.5, 71));
  CosimConfig cfg;
  cfg.integ.dt = 1e-3;
  cfg.integ.n_steps = 100;
  cfg.integ.n_replicas = 4;
  cfg.integ.thinning = 10;
  cfg.integ.seed = 10;
  cfg.x0 = {X0Source::Mode::Fixed, vec2(0.4, 0.1)};
  const PathwiseErrorReport report = cosimulate(sys.spec, model, cfg);
  CHECK(report.times[0] == 0.0);
  CHECK(report.mean_sq_sup[0] == 0.0);
  CHECK(report.marginal_mse[0] == 0.0);
}

TEST_CASE("exact-coefficient radial null test tracks the step size") {
  // kappa1 = kappa2 = 0: the only pathwise error is discretization, of
  // order dt over a unit horizon.
  const BuiltinSystem sys = make_builtin("radial2d");
  const EffectiveModel model = quadrature_oracle(sys, grid1(0.05, 4.0, 80));
  double previous = std::numeric_limits<double>::infinity();
  for (double dt : {1e-3, 5e-4}) {
    CosimConfig cfg;
    cfg.integ.dt = dt;
    cfg.integ.n_steps = std::lround(1.0 / dt);
    cfg.integ.n_replicas = 200;
    cfg.integ.thinning = cfg.integ.n_steps / 10;
    cfg.integ.burn_in_steps = std::lround(4.0 / dt);
    cfg.integ.seed = 1812;
    cfg.x0 = {X0Source::Mode::Equilibrium, sys.x_init};
    const PathwiseErrorReport report = cosimulate(sys.spec, model, cfg);
    CHECK(report.final_mean_sq_sup() <= 10.0 * dt);
    CHECK(report.final_mean_sq_sup() < previous);
    previous = report.final_mean_sq_sup();
    // Pathwise sup dominates the marginal error at every recorded time.
    for (std::size_t j = 0; j < report.times.size(); ++j)
      CHECK(report.marginal_mse[j] <= report.mean_sq_sup[j] + 1e-15);
  }
}

TEST_CASE("pathwise error shrinks with the time-scale separation") {
  std::vector<double> deltas = {0.2, 0.1, 0.05, 0.02};
  std::vector<double> measured, se;
  for (double delta : deltas) {
    const nlohmann::json params = {{"delta", delta}};
    const BuiltinSystem sys = make_builtin("case2-linear", params);
    const EffectiveModel model = quadrature_oracle(sys, grid1(-3.5, 3.5, 71));
    const double dt = delta / 50.0;
    CosimConfig cfg;
    cfg.integ.dt = dt;
    cfg.integ.n_steps = std::lround(1.0 / dt);
    cfg.integ.n_replicas = 100;
    cfg.integ.thinning = cfg.integ.n_steps;
    cfg.integ.burn_in_steps = std::lround(4.0 / dt);
    cfg.integ.seed = 42;
    cfg.x0 = {X0Source::Mode::Equilibrium, sys.x_init};
    const PathwiseErrorReport report = cosimulate(sys.spec, model, cfg);
    measured.push_back(report.final_mean_sq_sup());
    se.push_back(report.final_se_sq_sup());
  }
  for (std::size_t i = 1; i < measured.size(); ++i)
    CHECK(measured[i] < measured[i - 1]);
  CHECK(measured.front() - measured.back() >=
        3.0 * (se.front() + se.back()));
}

TEST_CASE("decoupling the noise inflates the pathwise error") {
  const nlohmann::json params = {{"delta", 0.02}};
  const BuiltinSystem sys = make_builtin("case2-linear", params);
  const EffectiveModel model = quadrature_oracle(sys, grid1(-3.5, 3.5, 71));
  CosimConfig cfg;
  cfg.integ.dt = 4e-4;
  cfg.integ.n_steps = 2500;
  cfg.integ.n_replicas = 100;
  cfg.integ.thinning = 2500;
  cfg.integ.burn_in_steps = 10000;
  cfg.integ.seed = 7;
  cfg.x0 = {X0Source::Mode::Equilibrium, sys.x_init};

  const PathwiseErrorReport coupled_run = cosimulate(sys.spec, model, cfg);
  cfg.couple_noise = false;
  const PathwiseErrorReport uncoupled_run = cosimulate(sys.spec, model, cfg);
  CHECK(uncoupled_run.final_mean_sq_sup() - coupled_run.final_mean_sq_sup() >=
        3.0 * (uncoupled_run.final_se_sq_sup() + coupled_run.final_se_sq_sup()));
}

TEST_CASE("marginal error series starts at zero and saturates on the toy") {
  const BuiltinSystem sys = make_builtin("case2-linear");
  const EffectiveModel model = quadrature_oracle(sys, grid1(-4.0, 4.0, 81));
  CosimConfig cfg;
  cfg.integ.dt = 1e-3;
  cfg.integ.n_replicas = 200;
  cfg.integ.burn_in_steps = 6000;
  cfg.integ.seed = 1234;
  cfg.x0 = {X0Source::Mode::Equilibrium, sys.x_init};
  const MarginalSeries series = marginal_mse_experiment(
      sys.spec, model, cfg, {0.0, 1.0, 5.0, 10.0});
  CHECK(series.mse[0] == 0.0);
  CHECK(series.mse[2] >= 0.95 * series.mse[3] - 3.0 * (series.se[2] + series.se[3]));
  CHECK(series.mse[3] > 0.0);
}

TEST_CASE("leaving the grid is counted and flagged") {
  const BuiltinSystem sys = make_builtin("case2-linear");
  const EffectiveModel model = toy_model(-0.2, 0.2, 5);
  CosimConfig cfg;
  cfg.integ.dt = 1e-3;
  cfg.integ.n_steps = 3000;
  cfg.integ.n_replicas = 4;
  cfg.integ.thinning = 300;
  cfg.integ.seed = 3;
  cfg.x0 = {X0Source::Mode::Fixed, vec2(1.5, 1.5)};  // starts outside
  const PathwiseErrorReport report = cosimulate(sys.spec, model, cfg);
  CHECK(report.excursion_steps > 0);
  CHECK(report.flagged_unreliable);
}
