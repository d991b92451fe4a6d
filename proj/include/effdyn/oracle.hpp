#pragma once

#include "effdyn/effective.hpp"
#include "effdyn/systems.hpp"

namespace effdyn {

// d(chart point)/du by central differences.
Vec chart_tangent(const FiberChart& chart, const Vec& z, double u);

// log of the fiber weight at chart coordinate u:
//   -beta V(x) - (1/2) log det(grad(xi) grad(xi)^T)(x) + log |dx/du|.
double fiber_log_weight(const SystemSpec& spec, const FiberChart& chart,
                        const Vec& z, double u);

// Deterministic conditional expectation E over the fiber measure at level z:
// the Boltzmann weight exp(-beta V) times the co-area factor
// det(grad(xi) grad(xi)^T)^(-1/2), integrated in the chart coordinate with
// the metric factor |dx/du|. Ground truth for the stochastic estimators.
double conditional_expectation(const SystemSpec& spec, const FiberChart& chart,
                               const Vec& z, const ScalarFn& f,
                               double tol = 1e-11);

// Unnormalized fiber mass q(z) (the integrand of the marginal density Q),
// consistent across z up to one global scale.
double fiber_mass(const SystemSpec& spec, const FiberChart& chart, const Vec& z,
                  double tol = 1e-11);

struct OracleOptions {
  double tol = 1e-11;
  // Wide box over which Q is normalized (defaults to the system's).
  Vec z_wide_lo, z_wide_hi;
};

// Effective model with (b_tilde, sigma_tilde, Q) from adaptive quadrature.
// Only 1-dimensional fibers (line or circle charts) are supported; m must
// be 1 for the Q normalization.
EffectiveModel quadrature_oracle(const SystemSpec& spec, const FiberChart& chart,
                                 const ZGrid& grid, const OracleOptions& opts);

EffectiveModel quadrature_oracle(const BuiltinSystem& sys, const ZGrid& grid,
                                 double tol = 1e-11);
EffectiveModel quadrature_oracle(const BuiltinSystem& sys, double tol = 1e-11);

}  // namespace effdyn
