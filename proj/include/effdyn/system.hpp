#pragma once

#include <functional>
#include <vector>

#include "effdyn/fd.hpp"

namespace effdyn {

// Full diffusion model
//
//   dx = -a grad(V) dt + (1/beta) div(a) dt + sqrt(2/beta) sigma dW,
//
// with mobility a = sigma sigma^T uniformly elliptic, plus a reaction
// coordinate xi: R^n -> R^m of full rank. Callbacks are immutable after
// construction; every operation on a SystemSpec is a pure function, so a
// spec can be shared across concurrent workers.
struct SystemSpec {
  int n = 0;        // ambient dimension
  int m = 0;        // reaction-coordinate dimension, 1 <= m < n
  int n_prime = 0;  // noise dimension (columns of sigma); 0 -> defaults to n
  double beta = 1.0;
  double c1 = 1e-10;  // ellipticity floor used by validation

  ScalarFn potential;
  VectorFn potential_grad;
  MatrixFn sigma;         // n x n'; optional if mobility is given
  MatrixFn mobility;      // n x n symmetric; optional if sigma is given
  VectorFn mobility_div;  // optional; finite-difference fallback otherwise
  VectorFn xi;
  MatrixFn xi_jac;  // m x n
  std::function<Mat(const Vec&, int)> xi_hess;  // n x n, component i

  int noise_dim() const { return n_prime > 0 ? n_prime : n; }
};

// a(x): mobility callback if given, else sigma sigma^T; neither is a
// configuration error.
Mat mobility_at(const SystemSpec& spec, const Vec& x);

// sigma(x): callback if given, else the SPD square root of a(x).
Mat sigma_at(const SystemSpec& spec, const Vec& x);

// div(a)(x): callback if given, else central differences of mobility_at.
Vec mobility_div_at(const SystemSpec& spec, const Vec& x);

// Checks the spec invariants at the given sample points: callback output
// dimensions, a symmetric with smallest eigenvalue >= c1, rank(grad xi) = m,
// and a == sigma sigma^T to 1e-12 relative when both callbacks exist.
// Throws ConfigError on the first violation.
void validate_spec(const SystemSpec& spec, const std::vector<Vec>& points);

// Scalar field with optional analytic derivatives. Analytic callbacks take
// precedence; missing ones are filled by central differences.
struct ScalarField {
  ScalarFn value;
  VectorFn gradient;  // optional
  MatrixFn hessian;   // optional
};

struct DerivativeBundle {
  Vec gradient;
  Mat hessian;
};

// Central-difference gradient and Hessian of f at x, both O(h^2); the
// Hessian is symmetrized. h > 0 overrides the default per-coordinate steps.
DerivativeBundle finite_difference_bundle(const SystemSpec& spec,
                                          const ScalarFn& f, const Vec& x,
                                          double h = 0.0);

// Generator of the full dynamics applied to f:
//   (L f)(x) = -(a grad V) . grad f + (1/beta) div(a) . grad f
//              + (1/beta) a : hess f.
double apply_generator(const SystemSpec& spec, const ScalarField& f,
                       const Vec& x);

// (L xi_l)(x) using the spec's analytic xi derivatives.
double generator_on_xi(const SystemSpec& spec, int component, const Vec& x);
Vec generator_on_xi_all(const SystemSpec& spec, const Vec& x);

}  // namespace effdyn
