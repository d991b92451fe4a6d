#include "effdyn/sampler.hpp"

#include <cmath>
#include <sstream>

#include "effdyn/errors.hpp"
#include "effdyn/geometry.hpp"

namespace effdyn {

void validate(const IntegratorConfig& cfg) {
  if (cfg.dt <= 0.0) throw ConfigError("integrator dt must be positive");
  if (cfg.n_steps < 0) throw ConfigError("integrator n_steps must be >= 0");
  if (cfg.n_replicas < 1) throw ConfigError("integrator n_replicas must be >= 1");
  if (cfg.thinning < 1) throw ConfigError("integrator thinning must be >= 1");
}

Vec em_step(const SystemSpec& spec, const Vec& x, double dt, const Vec& dW,
            long step_index) {
  const Mat a = mobility_at(spec, x);
  const Vec grad_v = spec.potential_grad(x);
  const Vec div_a = mobility_div_at(spec, x);
  const Mat s = sigma_at(spec, x);
  Vec next = x + (-(a * grad_v) + div_a / spec.beta) * dt +
             std::sqrt(2.0 / spec.beta) * (s * dW);
  if (!next.allFinite())
    throw DivergenceError("trajectory diverged", -1, step_index);
  return next;
}

namespace {

void run_replica_full(const SystemSpec& spec, const IntegratorConfig& cfg,
                      const X0Source& x0, int replica,
                      const TrajectoryVisitor& visit) {
  const int nw = spec.noise_dim();
  Vec x = x0.point;
  Vec dW(nw);
  const double root_dt = std::sqrt(cfg.dt);

  const long burn =
      x0.mode == X0Source::Mode::Equilibrium ? cfg.resolved_burn_in() : 0;
  if (burn > 0) {
    NoiseStream noise(cfg.seed, static_cast<std::uint32_t>(replica),
                      StreamTag::BurnIn);
    for (long k = 0; k < burn; ++k) {
      noise.fill_normals(static_cast<std::uint64_t>(k), {dW.data(), static_cast<std::size_t>(dW.size())});
      dW *= root_dt;
      try {
        x = em_step(spec, x, cfg.dt, dW, k);
      } catch (const DivergenceError& e) {
        throw DivergenceError(e.what(), replica, e.step);
      }
    }
  }

  NoiseStream noise(cfg.seed, static_cast<std::uint32_t>(replica),
                    StreamTag::Main);
  long record = 0;
  if (visit) visit(replica, record++, 0.0, x, spec.xi(x));
  for (long k = 0; k < cfg.n_steps; ++k) {
    noise.fill_normals(static_cast<std::uint64_t>(k), {dW.data(), static_cast<std::size_t>(dW.size())});
    dW *= root_dt;
    try {
      x = em_step(spec, x, cfg.dt, dW, k);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.what(), replica, e.step);
    }
    if ((k + 1) % cfg.thinning == 0 && visit)
      visit(replica, record++, (k + 1) * cfg.dt, x, spec.xi(x));
  }
}

}  // namespace

void simulate_full(const SystemSpec& spec, const IntegratorConfig& cfg,
                   const X0Source& x0, const TrajectoryVisitor& visit) {
  validate(cfg);
  if (x0.point.size() != spec.n)
    throw ConfigError("x0 has wrong dimension");
  for (int r = 0; r < cfg.n_replicas; ++r)
    run_replica_full(spec, cfg, x0, r, visit);
}

std::vector<Vec> collect_equilibrium_samples(const SystemSpec& spec,
                                             const IntegratorConfig& cfg,
                                             const X0Source& x0) {
  std::vector<Vec> samples;
  samples.reserve(static_cast<std::size_t>(cfg.n_replicas) *
                  (cfg.n_steps / cfg.thinning + 1));
  simulate_full(spec, cfg, x0,
                [&samples](int, long rec, double, const Vec& x, const Vec&) {
                  if (rec > 0) samples.push_back(x);  // skip the start state
                });
  return samples;
}

Vec project_to_fiber(const SystemSpec& spec, const Vec& x, const Vec& z,
                     double tol, int max_iter) {
  // Directions fixed at the base point; Newton runs on lambda in R^m.
  const Mat dirs = mobility_at(spec, x) * spec.xi_jac(x).transpose();  // n x m
  Vec y = x;
  Vec residual = spec.xi(y) - z;
  if (residual.norm() <= tol) return y;
  Vec lambda = Vec::Zero(spec.m);
  for (int it = 0; it < max_iter; ++it) {
    const Mat jac = spec.xi_jac(y) * dirs;  // m x m
    lambda -= jac.fullPivLu().solve(residual);
    y = x + dirs * lambda;
    residual = spec.xi(y) - z;
    if (!residual.allFinite())
      throw ProjectionError("fiber projection produced non-finite state",
                            std::numeric_limits<double>::infinity());
    if (residual.norm() <= tol) return y;
  }
  std::ostringstream msg;
  msg << "fiber projection did not converge: residual " << residual.norm()
      << " after " << max_iter << " iterations";
  throw ProjectionError(msg.str(), residual.norm());
}

void simulate_fiber(const SystemSpec& spec, const FiberConfig& fc,
                    const TrajectoryVisitor& visit) {
  validate(fc.base);
  if (fc.newton_tol <= 0.0) throw ConfigError("newton_tol must be positive");
  if (fc.z.size() != spec.m) throw ConfigError("fiber level z has wrong dimension");

  const IntegratorConfig& cfg = fc.base;
  const int nw = spec.noise_dim();
  const double root_dt = std::sqrt(cfg.dt);
  const double noise_coef = std::sqrt(2.0 / spec.beta);

  // Matrix field Pi^T a whose divergence enters the constrained drift.
  auto pi_t_a = [&spec](const Vec& y) -> Mat {
    return projection_pi(spec, y).transpose() * mobility_at(spec, y);
  };

  if (fc.start.size() != spec.n)
    throw ConfigError("FiberConfig.start must be a state near the fiber");

  for (int replica = 0; replica < cfg.n_replicas; ++replica) {
    Vec x =
        project_to_fiber(spec, fc.start, fc.z, fc.newton_tol, fc.newton_max_iter);

    NoiseStream noise(cfg.seed, static_cast<std::uint32_t>(replica),
                      StreamTag::Main);
    Vec dWr(nw);
    const long burn = cfg.resolved_burn_in();
    long record = 0;
    const long total = burn + cfg.n_steps;
    for (long k = 0; k < total; ++k) {
      noise.fill_normals(static_cast<std::uint64_t>(k), {dWr.data(), static_cast<std::size_t>(dWr.size())});
      dWr *= root_dt;
      const Mat pta = pi_t_a(x);
      const Vec drift = -(pta * spec.potential_grad(x)) +
                        fd_matrix_divergence(pi_t_a, x) / spec.beta;
      const Mat pts = projection_pi(spec, x).transpose() * sigma_at(spec, x);
      Vec prop = x + drift * cfg.dt + noise_coef * (pts * dWr);
      if (!prop.allFinite())
        throw DivergenceError("fiber trajectory diverged", replica, k);
      x = project_to_fiber(spec, prop, fc.z, fc.newton_tol, fc.newton_max_iter);
      if (k >= burn && (k - burn + 1) % cfg.thinning == 0 && visit)
        visit(replica, record++, (k - burn + 1) * cfg.dt, x, spec.xi(x));
    }
  }
}

std::vector<Vec> collect_fiber_samples(const SystemSpec& spec,
                                       const FiberConfig& fc) {
  std::vector<Vec> samples;
  simulate_fiber(spec, fc,
                 [&samples](int, long, double, const Vec& x, const Vec&) {
                   samples.push_back(x);
                 });
  return samples;
}

}  // namespace effdyn
