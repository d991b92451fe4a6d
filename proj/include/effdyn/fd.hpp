#pragma once

#include <Eigen/Dense>
#include <functional>

namespace effdyn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using ScalarFn = std::function<double(const Vec&)>;
using VectorFn = std::function<Vec(const Vec&)>;
using MatrixFn = std::function<Mat(const Vec&)>;

// Central-difference steps, scaled per coordinate by max(1, |x_i|).
// Gradient step ~ eps^(1/3), Hessian step ~ eps^(1/4): the optimal scalings
// for first and second central differences.
double fd_step_grad(double xi);
double fd_step_hess(double xi);

// O(h^2) central differences. Passing h > 0 overrides the default step for
// every coordinate. Non-finite stencil values raise EvaluationError.
Vec fd_gradient(const ScalarFn& f, const Vec& x, double h = 0.0);
Mat fd_hessian(const ScalarFn& f, const Vec& x, double h = 0.0);

// Jacobian of a vector field, rows indexed by output component.
Mat fd_jacobian(const VectorFn& f, const Vec& x, int out_dim, double h = 0.0);

// (div M)_i = sum_j dM_ij/dx_j for a matrix field.
Vec fd_matrix_divergence(const MatrixFn& m, const Vec& x, double h = 0.0);

}  // namespace effdyn
