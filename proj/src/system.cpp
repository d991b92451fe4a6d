#include "effdyn/system.hpp"

#include <Eigen/Eigenvalues>
#include <sstream>

#include "effdyn/errors.hpp"
#include "effdyn/geometry.hpp"

namespace effdyn {

Mat mobility_at(const SystemSpec& spec, const Vec& x) {
  if (spec.mobility) {
    Mat a = spec.mobility(x);
    if (a.rows() != spec.n || a.cols() != spec.n)
      throw ConfigError("mobility callback returned wrong dimensions");
    return a;
  }
  if (spec.sigma) {
    const Mat s = spec.sigma(x);
    if (s.rows() != spec.n)
      throw ConfigError("sigma callback returned wrong row count");
    return s * s.transpose();
  }
  throw ConfigError("SystemSpec needs a mobility or a sigma callback");
}

Mat sigma_at(const SystemSpec& spec, const Vec& x) {
  if (spec.sigma) {
    Mat s = spec.sigma(x);
    if (s.rows() != spec.n)
      throw ConfigError("sigma callback returned wrong row count");
    return s;
  }
  return spd_sqrt(mobility_at(spec, x));
}

Vec mobility_div_at(const SystemSpec& spec, const Vec& x) {
  if (spec.mobility_div) {
    Vec d = spec.mobility_div(x);
    if (d.size() != spec.n)
      throw ConfigError("mobility_div callback returned wrong dimension");
    return d;
  }
  return fd_matrix_divergence(
      [&spec](const Vec& y) { return mobility_at(spec, y); }, x);
}

void validate_spec(const SystemSpec& spec, const std::vector<Vec>& points) {
  if (spec.n < 2 || spec.m < 1 || spec.m >= spec.n)
    throw ConfigError("SystemSpec dimensions must satisfy 1 <= m < n");
  if (spec.beta <= 0.0) throw ConfigError("beta must be positive");
  if (!spec.potential || !spec.potential_grad)
    throw ConfigError("potential and potential_grad are required");
  if (!spec.xi || !spec.xi_jac || !spec.xi_hess)
    throw ConfigError("xi, xi_jac and xi_hess are required");

  for (const Vec& x : points) {
    if (x.size() != spec.n) throw ConfigError("sample point has wrong dimension");
    if (spec.potential_grad(x).size() != spec.n)
      throw ConfigError("potential_grad returned wrong dimension");
    const Vec z = spec.xi(x);
    if (z.size() != spec.m) throw ConfigError("xi returned wrong dimension");
    const Mat jac = spec.xi_jac(x);
    if (jac.rows() != spec.m || jac.cols() != spec.n)
      throw ConfigError("xi_jac returned wrong dimensions");

    const Mat a = mobility_at(spec, x);
    const double asym = (a - a.transpose()).norm();
    if (asym > 1e-10 * std::max(1.0, a.norm()))
      throw ConfigError("mobility matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
    if (es.eigenvalues().minCoeff() < spec.c1) {
      std::ostringstream msg;
      msg << "mobility eigenvalue " << es.eigenvalues().minCoeff()
          << " below ellipticity floor " << spec.c1;
      throw ConfigError(msg.str());
    }
    if (spec.mobility && spec.sigma) {
      const Mat s = spec.sigma(x);
      if ((a - s * s.transpose()).norm() > 1e-12 * std::max(1.0, a.norm()))
        throw ConfigError("mobility disagrees with sigma sigma^T");
    }

    Eigen::JacobiSVD<Mat> svd(jac);
    if (svd.singularValues().minCoeff() <
        1e-10 * std::max(1.0, svd.singularValues().maxCoeff()))
      throw ConfigError("grad(xi) is rank deficient at a sample point");
  }
}

DerivativeBundle finite_difference_bundle(const SystemSpec& /*spec*/,
                                          const ScalarFn& f, const Vec& x,
                                          double h) {
  return {fd_gradient(f, x, h), fd_hessian(f, x, h)};
}

double apply_generator(const SystemSpec& spec, const ScalarField& f,
                       const Vec& x) {
  if (!f.value && !(f.gradient && f.hessian))
    throw ConfigError("ScalarField needs a value or both derivative callbacks");
  Vec grad;
  Mat hess;
  if (f.gradient) {
    grad = f.gradient(x);
  } else {
    grad = fd_gradient(f.value, x);
  }
  if (f.hessian) {
    hess = f.hessian(x);
  } else {
    hess = fd_hessian(f.value, x);
  }
  if (grad.size() != spec.n || hess.rows() != spec.n || hess.cols() != spec.n)
    throw ConfigError("ScalarField derivative dimensions do not match n");

  const Mat a = mobility_at(spec, x);
  const Vec grad_v = spec.potential_grad(x);
  if (grad_v.size() != spec.n)
    throw ConfigError("potential_grad returned wrong dimension");
  const Vec div_a = mobility_div_at(spec, x);

  const double drift_term = -(a * grad_v).dot(grad) + div_a.dot(grad) / spec.beta;
  const double diff_term = a.cwiseProduct(hess).sum() / spec.beta;
  return drift_term + diff_term;
}

double generator_on_xi(const SystemSpec& spec, int component, const Vec& x) {
  const Mat a = mobility_at(spec, x);
  const Vec grad_v = spec.potential_grad(x);
  const Vec div_a = mobility_div_at(spec, x);
  const Vec grad_xi = spec.xi_jac(x).row(component).transpose();
  const Mat hess_xi = spec.xi_hess(x, component);
  return -(a * grad_v).dot(grad_xi) + div_a.dot(grad_xi) / spec.beta +
         a.cwiseProduct(hess_xi).sum() / spec.beta;
}

Vec generator_on_xi_all(const SystemSpec& spec, const Vec& x) {
  const Mat a = mobility_at(spec, x);
  const Vec grad_v = spec.potential_grad(x);
  const Vec div_a = mobility_div_at(spec, x);
  const Mat jac = spec.xi_jac(x);
  Vec out(spec.m);
  const Vec drift = -(a * grad_v) + div_a / spec.beta;
  for (int l = 0; l < spec.m; ++l) {
    const Mat hess_xi = spec.xi_hess(x, l);
    out[l] = drift.dot(jac.row(l).transpose()) +
             a.cwiseProduct(hess_xi).sum() / spec.beta;
  }
  return out;
}

}  // namespace effdyn
