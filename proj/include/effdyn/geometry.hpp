#pragma once

#include "effdyn/system.hpp"

namespace effdyn {

// Level-set linear algebra at a point x:
//   Phi = grad(xi) a grad(xi)^T   (m x m, SPD)
//   A   = Phi^(1/2)               (unique SPD square root)
//   Pi  = I - sum_ij (Phi^-1)_ij grad(xi_i) (a grad(xi_j))^T
// Pi is the a-compatible skew projector onto the fiber tangent space:
// Pi^2 = Pi, Pi grad(xi_i) = 0, Pi^T a = a Pi.
struct LevelSetFrame {
  Vec x;
  Mat grad_xi;  // m x n
  Mat phi;      // m x m
  Mat A;        // m x m
  Mat Pi;       // n x n
};

// Unique SPD square root via symmetric eigendecomposition. Eigenvalues below
// 1e-12 raise NumericError; asymmetry beyond 1e-9 relative raises
// EvaluationError.
Mat spd_sqrt(const Mat& m);

// Like spd_sqrt but clamps eigenvalues to the 1e-12 floor instead of
// throwing (used at interpolation query time).
Mat spd_sqrt_clamped(const Mat& m);

// Phi(x); throws DegenerateCoordinateError when the smallest eigenvalue
// drops to 1e-12.
Mat phi_matrix(const SystemSpec& spec, const Vec& x);

Mat projection_pi(const SystemSpec& spec, const Vec& x);

// Orthogonal projector onto the fiber tangent space,
// P = I - grad(xi)^T (grad(xi) grad(xi)^T)^-1 grad(xi).
Mat orthogonal_tangent_projector(const SystemSpec& spec, const Vec& x);

LevelSetFrame level_set_frame(const SystemSpec& spec, const Vec& x);

// Commutator fields B_ij of the vector fields a grad(xi_i) together with the
// integrability residual max_ij |Pi^T B_ij|. A zero residual on a
// neighborhood certifies a local coordinate change making xi linear with
// block-orthogonal mobility; B_ij = -B_ji so m = 1 always gives zero.
struct FrobeniusResult {
  std::vector<std::vector<Vec>> commutators;  // [i][j], each in R^n
  double residual = 0.0;
};

FrobeniusResult frobenius_obstruction(const SystemSpec& spec, const Vec& x);

}  // namespace effdyn
