#pragma once

#include "effdyn/effective.hpp"

namespace effdyn {

// Increment of the m-dimensional Brownian motion driving the effective
// process, built from the full dynamics' noise:
//   dw_tilde = (grad(xi) a grad(xi)^T)^(-1/2) grad(xi) sigma dW.
// Levy's characterization makes this an exact Brownian motion, so the two
// processes share their randomness pathwise.
Vec coupled_noise_increment(const SystemSpec& spec, const Vec& x, const Vec& dW);

struct CosimConfig {
  IntegratorConfig integ;
  X0Source x0;
  // false: drive z with an independent Brownian motion instead (for
  // measuring what the coupling buys).
  bool couple_noise = true;
  // Runs whose clamped-coefficient steps exceed this fraction are flagged.
  double excursion_flag_fraction = 0.01;
};

// Monte Carlo record of the pathwise discrepancy between xi(x(s)) and z(s).
struct PathwiseErrorReport {
  double dt = 0.0;
  int n_replicas = 0;
  std::uint64_t seed = 0;

  std::vector<double> times;         // recording schedule, starts at 0
  std::vector<double> mean_sq_sup;   // E sup_{s<=t} |xi(x)-z|^2 (running)
  std::vector<double> se_sq_sup;
  std::vector<double> marginal_mse;  // E |xi(x(t))-z(t)|^2
  std::vector<double> se_marginal;

  std::vector<double> replica_sup_sq;  // final per-replica sup^2
  long excursion_steps = 0;            // clamped coefficient queries
  long total_steps = 0;
  bool flagged_unreliable = false;

  double final_mean_sq_sup() const { return mean_sq_sup.back(); }
  double final_se_sq_sup() const { return se_sq_sup.back(); }
};

// Co-simulates the full process and the effective process on the shared
// noise: per step one dW advances x by Euler-Maruyama and z by
//   z += b_tilde(z) dt + sqrt(2/beta) sigma_tilde(z) dw_tilde,
// with both coefficient evaluations at the left endpoint. z(0) = xi(x(0)).
// Deterministic given (seed, replica); replica results are folded in
// replica order.
PathwiseErrorReport cosimulate(const SystemSpec& spec,
                               const EffectiveModel& model,
                               const CosimConfig& cfg);

// Marginal mean-square error sampled at the requested times (snapped to the
// step grid).
struct MarginalSeries {
  std::vector<double> times;
  std::vector<double> mse;
  std::vector<double> se;
};

MarginalSeries marginal_mse_experiment(const SystemSpec& spec,
                                       const EffectiveModel& model,
                                       const CosimConfig& cfg,
                                       const std::vector<double>& t_grid);

}  // namespace effdyn
