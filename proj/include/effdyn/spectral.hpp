#pragma once

#include "effdyn/effective.hpp"
#include "effdyn/systems.hpp"

namespace effdyn {

struct RhoOptions {
  int n_nodes = 801;       // fine discretization
  double box_sds = 10.0;   // line charts: window halfwidth in weight sds
};

struct RhoEstimate {
  double rho = 0.0;         // spectral gap at the fine resolution
  double rho_coarse = 0.0;  // at half resolution, for convergence reporting
  double refinement_rel_diff = 0.0;
};

// Spectral gap of the fiber generator at level z: the constrained diffusion
// is discretized in the chart coordinate as a conservative finite-volume
// operator, self-adjoint under the fiber weight, and the smallest nonzero
// eigenvalue of its negative is returned. Requires a 1-dimensional fiber
// (line or circle chart); anything else raises UnsupportedGeometryError.
RhoEstimate estimate_rho(const SystemSpec& spec, const FiberChart& chart,
                         const Vec& z, const RhoOptions& opts = {});

RhoEstimate estimate_rho(const BuiltinSystem& sys, const Vec& z,
                         const RhoOptions& opts = {});

// Minimum of rho over a set of levels (the uniformity proxy reported to the
// bound evaluators).
double min_rho_over(const BuiltinSystem& sys, const std::vector<Vec>& levels,
                    const RhoOptions& opts = {});

}  // namespace effdyn
