#pragma once

#include <vector>

#include "effdyn/sampler.hpp"
#include "effdyn/system.hpp"

namespace effdyn {

// Rectangular grid in R^m with uniform per-axis nodes.
class ZGrid {
public:
  ZGrid() = default;
  ZGrid(const Vec& lo, const Vec& hi, const std::vector<int>& nodes);

  int dim() const { return static_cast<int>(axes_.size()); }
  long size() const { return total_; }
  const std::vector<double>& axis(int d) const { return axes_[d]; }
  double step(int d) const { return steps_[d]; }

  Vec node(long flat) const;
  std::vector<int> unflatten(long flat) const;
  long flatten(const std::vector<int>& idx) const;
  bool is_interior(long flat) const;

  // Nearest-node binning; nodes own [z_k - step/2, z_k + step/2) per axis.
  // Returns -1 when z falls outside every bin.
  long bin(const Vec& z) const;

  // Multilinear interpolation stencil at z clamped to the grid box.
  struct Stencil {
    std::vector<long> corners;
    std::vector<double> weights;
    bool clamped = false;
  };
  Stencil stencil(const Vec& z) const;

  double cell_volume() const;

private:
  std::vector<std::vector<double>> axes_;
  std::vector<double> steps_;
  std::vector<long> strides_;
  long total_ = 0;
};

// Gridded effective coefficients. Nodes hold the conditional mean of
// Phi = grad(xi) a grad(xi)^T and its SPD square root sigma_tilde, the
// effective drift b_tilde (conditional mean of L xi), the marginal density Q
// and sample counts. Queries interpolate the Phi mean entrywise
// (multilinear) and take the floored SPD square root, which preserves the
// identity sigma_tilde(z)^2 = mean(Phi)(z) between nodes; out-of-grid
// queries clamp to the boundary. Immutable after finalization.
struct EffectiveModel {
  ZGrid grid;
  int m = 0;
  std::vector<Vec> b;
  std::vector<Mat> phi_mean;
  std::vector<Mat> sigma_node;
  std::vector<double> Q;
  std::vector<long> count;
  std::vector<char> missing;

  Vec drift(const Vec& z, bool* clamped = nullptr) const;
  Mat sigma(const Vec& z, bool* clamped = nullptr) const;
  Mat phi(const Vec& z, bool* clamped = nullptr) const;

  // sum_k Q_k * cell volume; 1 up to the mass outside the grid.
  double q_mass() const;

  // Node invariants: sigma symmetric/eigenvalue-floored, sigma^2 == phi_mean,
  // q_mass in [0.98, 1.02]. Throws EstimationError on violation.
  void check_invariants() const;
};

enum class EstimationMethod { Binned, Fiber };

struct EstimationOptions {
  EstimationMethod method = EstimationMethod::Binned;
  // Equilibrium trajectory source (binned statistics; also the Q pass in
  // fiber mode).
  IntegratorConfig trajectory;
  X0Source x0;
  // Per-node fiber sampling (fiber mode).
  IntegratorConfig fiber;
  double newton_tol = 1e-10;
  int newton_max_iter = 10;
  double max_missing_interior = 0.05;
};

// Conditional-expectation estimator for (b_tilde, sigma_tilde, Q) on the
// grid. Binned mode: hard-binned means over an equilibrium trajectory.
// Fiber mode: per-node means over constrained fiber dynamics, Q from a
// separate binned pass. Empty nodes are flagged missing (error if more than
// max_missing_interior of interior nodes) and filled from neighbors.
EffectiveModel estimate_effective(const SystemSpec& spec,
                                  const EstimationOptions& opts,
                                  const ZGrid& grid);

// kappa1^2 = E_mu sum_i (Pi grad L xi_i) . (a Pi grad L xi_i)
// kappa2^2 = E_mu sum_ij (Pi grad A_ij) . (a Pi grad A_ij)
// Gradients by central differences through the composite evaluations
// (A differentiates through the SPD square root numerically). Samples with
// non-finite composites are rejected; more than 1% rejected is an error.
struct KappaEstimate {
  double kappa1 = 0.0, kappa2 = 0.0;
  double kappa1_sq = 0.0, kappa1_sq_se = 0.0;
  double kappa2_sq = 0.0, kappa2_sq_se = 0.0;
  long rejected = 0, total = 0;
};

KappaEstimate estimate_kappas(const SystemSpec& spec,
                              const std::vector<Vec>& mu_samples);

// Grid lower bounds on the Lipschitz constants of b_tilde and sigma_tilde
// (max difference quotients over adjacent node pairs) and on the one-sided
// dissipativity constant L_d (min of -(db . dz)/|dz|^2). Missing nodes are
// excluded; an all-missing grid is an error.
struct LipschitzEstimate {
  double L_b = 0.0;
  double L_sigma = 0.0;
  double L_d = 0.0;
};

LipschitzEstimate estimate_lipschitz(const EffectiveModel& model);

// Constants feeding the closed-form error-bound evaluators.
struct BoundParams {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double rho = 1.0;
  double L_b = 0.0;
  double L_sigma = 0.0;
  double L_d = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  double C1_sup_phi = 0.0;
  double C2_sup_A = 0.0;

  void validate() const;
};

}  // namespace effdyn
