#pragma once

#include <optional>
#include <span>
#include <vector>

#include "effdyn/effective.hpp"

namespace effdyn {

enum class BoundKind {
  Prop1,            // equilibrium start, direct estimate
  Thm1,             // equilibrium start, improved (forward-backward) estimate
  Thm2Density,      // start density with finite chi^2 relative to mu
  Thm2Fixed,        // fixed starting point
  DissContractive,  // dissipative drift, L_d > L_sigma^2 / beta
  DissExpansive,    // dissipative drift, L_d <= L_sigma^2 / beta
};

struct BoundExtras {
  std::optional<double> chi2;     // Thm2Density: integral of (dmu_bar/dmu)^2 dmu
  std::optional<double> t0, t1;   // Thm2Fixed
  std::optional<double> p_t0_sq;  // Thm2Fixed: integral of p_{t0}^2 dmu
  std::optional<double> v1, v2;   // dissipative evaluators
};

struct BoundQuery {
  BoundKind kind = BoundKind::Thm1;
  BoundParams params;
  double t = 0.0;
  BoundExtras extras;
};

// Closed-form right-hand sides:
//   Prop1:  (3t / (beta rho)) (kappa1^2 t + 32 kappa2^2 / beta) e^{Lt}
//   Thm1:   (3t / (beta rho)) (27 kappa1^2 / (2 rho) + 32 kappa2^2 / beta) e^{Lt}
//     with L = 3 L_b^2 + 48 L_sigma^2 / beta + 1; these bound the mean
//     squared pathwise sup.
//   Thm2Density: sqrt(t) (9 kappa1 / (sqrt(2 beta) rho)
//                 + 12 kappa2 / (beta sqrt(rho))) sqrt(chi2) e^{Lt}
//   Thm2Fixed:   { sqrt(t) (9 kappa1 / (sqrt(2 beta) rho)
//                 + 12 kappa2 / (beta sqrt(rho)))
//                 [1 + e^{-alpha (t1 - t0)} sqrt(p_t0_sq)]
//                 + sqrt(t1) (3 C1 sqrt(t1) + 18 C2 / sqrt(beta)) } e^{Lt}
//     with L = (3/2) L_b^2 + 24 L_sigma^2 / beta + 1/2; these bound the mean
//     pathwise sup (first power).
//   DissContractive: C = L_d - L_sigma^2 (1 + v2) / beta - v1 / 2 > 0,
//     bound = (1 / (C beta rho)) [kappa1^2 / (2 v1)
//             + (2 kappa2^2 / beta)(1 + 1/v2)] (1 - e^{-2 C t})
//   DissExpansive:   C = L_sigma^2 (1 + v2) / beta - L_d + v1 / 2,
//     same bracket, times (e^{2 C t} - 1); these bound the marginal MSE.
// Missing extras raise QueryError; requesting the contractive form with
// L_d <= L_sigma^2 / beta raises RegimeError.
double theorem_bound(const BoundQuery& q);

// Thm2Fixed optimized over a t1 grid within [t0, t].
double theorem_bound_min_t1(const BoundQuery& q, std::span<const double> t1_grid);

// Dissipative bound minimized over (v1, v2) in (0, 4]^2 on a coarse grid.
struct DissipativeChoice {
  double v1 = 0.0, v2 = 0.0;
  double bound = 0.0;
};
DissipativeChoice minimize_dissipative(const BoundQuery& q, int grid_n = 80);

// Comparison bound for accumulations E f(t)^2 <= g(t)
// + C1 E(int_0^t f)^2 + C2 int_0^t E f^2:
//   nondecreasing form:  g(t) e^{(C1 + C2 + 1) t}
//   integral form:       g(t) + (C1 + C2) int_0^t e^{(C1 + C2 + 1)(t - s)} g(s) ds
// with the integral by trapezoid over the tabulated g.
struct GronwallResult {
  double nondecreasing_form = 0.0;
  double integral_form = 0.0;
};
GronwallResult gronwall_bound(std::span<const double> ts,
                              std::span<const double> gs, double C1, double C2,
                              double t);

// Log-log least squares of measured errors against a swept parameter.
struct ScalingFit {
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;  // in log space
};
ScalingFit fit_scaling(std::span<const std::pair<double, double>> points);

}  // namespace effdyn
