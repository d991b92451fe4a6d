#include "effdyn/coupled.hpp"

#include <algorithm>
#include <cmath>

#include "effdyn/errors.hpp"
#include "effdyn/geometry.hpp"

namespace effdyn {

Vec coupled_noise_increment(const SystemSpec& spec, const Vec& x,
                            const Vec& dW) {
  const Mat jac = spec.xi_jac(x);
  const Mat s = sigma_at(spec, x);
  const Mat a_root = spd_sqrt(phi_matrix(spec, x));
  // Solve A dw_tilde = grad(xi) sigma dW.
  return a_root.ldlt().solve(jac * (s * dW));
}

namespace {

struct ReplicaRecord {
  std::vector<double> sup_sq;   // running sup^2 at each recording time
  std::vector<double> marg_sq;  // |xi(x)-z|^2 at each recording time
  long excursions = 0;
  long steps = 0;
};

ReplicaRecord run_replica(const SystemSpec& spec, const EffectiveModel& model,
                          const CosimConfig& cfg, int replica, long n_records) {
  const IntegratorConfig& ic = cfg.integ;
  const int nw = spec.noise_dim();
  const double root_dt = std::sqrt(ic.dt);
  const double noise_coef = std::sqrt(2.0 / spec.beta);

  Vec x = cfg.x0.point;
  const long burn =
      cfg.x0.mode == X0Source::Mode::Equilibrium ? ic.resolved_burn_in() : 0;
  Vec dW(nw);
  if (burn > 0) {
    NoiseStream noise(ic.seed, static_cast<std::uint32_t>(replica),
                      StreamTag::BurnIn);
    for (long k = 0; k < burn; ++k) {
      noise.fill_normals(static_cast<std::uint64_t>(k), {dW.data(), static_cast<std::size_t>(dW.size())});
      dW *= root_dt;
      try {
        x = em_step(spec, x, ic.dt, dW, k);
      } catch (const DivergenceError& e) {
        throw DivergenceError(e.what(), replica, e.step);
      }
    }
  }

  Vec z = spec.xi(x);  // z(0) = xi(x(0))
  ReplicaRecord rec;
  rec.sup_sq.reserve(n_records);
  rec.marg_sq.reserve(n_records);
  rec.sup_sq.push_back(0.0);
  rec.marg_sq.push_back(0.0);

  NoiseStream noise(ic.seed, static_cast<std::uint32_t>(replica),
                    StreamTag::Main);
  NoiseStream alt(ic.seed, static_cast<std::uint32_t>(replica), StreamTag::Alt);
  Vec dw_tilde(spec.m);
  double sup_sq = 0.0;
  for (long k = 0; k < ic.n_steps; ++k) {
    noise.fill_normals(static_cast<std::uint64_t>(k), {dW.data(), static_cast<std::size_t>(dW.size())});
    dW *= root_dt;
    if (cfg.couple_noise) {
      dw_tilde = coupled_noise_increment(spec, x, dW);
    } else {
      alt.fill_normals(static_cast<std::uint64_t>(k),
                       {dw_tilde.data(), static_cast<std::size_t>(dw_tilde.size())});
      dw_tilde *= root_dt;
    }

    bool clamped_b = false, clamped_s = false;
    const Vec bz = model.drift(z, &clamped_b);
    const Mat sz = model.sigma(z, &clamped_s);
    if (clamped_b || clamped_s) ++rec.excursions;
    ++rec.steps;

    z += bz * ic.dt + noise_coef * (sz * dw_tilde);
    if (!z.allFinite())
      throw DivergenceError("effective trajectory diverged", replica, k);
    try {
      x = em_step(spec, x, ic.dt, dW, k);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.what(), replica, e.step);
    }

    const double err_sq = (spec.xi(x) - z).squaredNorm();
    sup_sq = std::max(sup_sq, err_sq);
    if ((k + 1) % ic.thinning == 0) {
      rec.sup_sq.push_back(sup_sq);
      rec.marg_sq.push_back(err_sq);
    }
  }
  return rec;
}

}  // namespace

PathwiseErrorReport cosimulate(const SystemSpec& spec,
                               const EffectiveModel& model,
                               const CosimConfig& cfg) {
  validate(cfg.integ);
  if (cfg.x0.point.size() != spec.n) throw ConfigError("x0 has wrong dimension");
  if (model.m != spec.m)
    throw ConfigError("effective model dimension does not match the system");

  const long n_records = cfg.integ.n_steps / cfg.integ.thinning + 1;
  PathwiseErrorReport report;
  report.dt = cfg.integ.dt;
  report.n_replicas = cfg.integ.n_replicas;
  report.seed = cfg.integ.seed;
  report.times.resize(n_records);
  for (long j = 0; j < n_records; ++j)
    report.times[j] = static_cast<double>(j * cfg.integ.thinning) * cfg.integ.dt;

  // Per-replica records folded in replica order: bit-exact for any worker
  // count.
  std::vector<ReplicaRecord> records(cfg.integ.n_replicas);
  for (int r = 0; r < cfg.integ.n_replicas; ++r)
    records[r] = run_replica(spec, model, cfg, r, n_records);

  report.mean_sq_sup.assign(n_records, 0.0);
  report.se_sq_sup.assign(n_records, 0.0);
  report.marginal_mse.assign(n_records, 0.0);
  report.se_marginal.assign(n_records, 0.0);
  const double nr = static_cast<double>(cfg.integ.n_replicas);
  for (long j = 0; j < n_records; ++j) {
    double s1 = 0.0, s2 = 0.0, m1 = 0.0, m2 = 0.0;
    for (const auto& rec : records) {
      s1 += rec.sup_sq[j];
      s2 += rec.sup_sq[j] * rec.sup_sq[j];
      m1 += rec.marg_sq[j];
      m2 += rec.marg_sq[j] * rec.marg_sq[j];
    }
    report.mean_sq_sup[j] = s1 / nr;
    report.marginal_mse[j] = m1 / nr;
    if (cfg.integ.n_replicas > 1) {
      const double var_s = std::max(0.0, (s2 - s1 * s1 / nr) / (nr - 1.0));
      const double var_m = std::max(0.0, (m2 - m1 * m1 / nr) / (nr - 1.0));
      report.se_sq_sup[j] = std::sqrt(var_s / nr);
      report.se_marginal[j] = std::sqrt(var_m / nr);
    }
  }

  report.replica_sup_sq.resize(cfg.integ.n_replicas);
  for (int r = 0; r < cfg.integ.n_replicas; ++r) {
    report.replica_sup_sq[r] = records[r].sup_sq.back();
    report.excursion_steps += records[r].excursions;
    report.total_steps += records[r].steps;
  }
  if (report.total_steps > 0) {
    const double frac = static_cast<double>(report.excursion_steps) /
                        static_cast<double>(report.total_steps);
    report.flagged_unreliable = frac > cfg.excursion_flag_fraction;
  }
  return report;
}

MarginalSeries marginal_mse_experiment(const SystemSpec& spec,
                                       const EffectiveModel& model,
                                       const CosimConfig& cfg,
                                       const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw ConfigError("marginal experiment needs a time grid");
  CosimConfig run = cfg;
  const double t_max = *std::max_element(t_grid.begin(), t_grid.end());
  run.integ.n_steps = static_cast<long>(std::llround(t_max / run.integ.dt));
  run.integ.thinning = 1;
  const PathwiseErrorReport report = cosimulate(spec, model, run);

  MarginalSeries series;
  for (double t : t_grid) {
    const long j = std::llround(t / run.integ.dt);
    if (j < 0 || j >= static_cast<long>(report.times.size()))
      throw ConfigError("marginal time grid exceeds the horizon");
    series.times.push_back(report.times[j]);
    series.mse.push_back(report.marginal_mse[j]);
    series.se.push_back(report.se_marginal[j]);
  }
  return series;
}

}  // namespace effdyn
