#pragma once

#include <functional>

namespace effdyn {

using Integrand = std::function<double(double)>;

// Adaptive Simpson on [a, b]. Throws OracleError (carrying the achieved
// tolerance) if the recursion depth is exhausted before reaching tol.
double adaptive_simpson(const Integrand& f, double a, double b,
                        double tol = 1e-11, int max_depth = 48);

// Trapezoid with doubling for smooth periodic integrands on [0, period).
double periodic_trapezoid(const Integrand& f, double period,
                          double tol = 1e-12, int max_doublings = 16);

}  // namespace effdyn
