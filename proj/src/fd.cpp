#include "effdyn/fd.hpp"

#include <cmath>
#include <limits>

#include "effdyn/errors.hpp"

namespace effdyn {

namespace {

const double kEps = std::numeric_limits<double>::epsilon();
const double kGradStep = std::cbrt(kEps);
const double kHessStep = std::pow(kEps, 0.25);

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw EvaluationError(std::string("non-finite value in ") + what);
  return v;
}

}  // namespace

double fd_step_grad(double xi) { return kGradStep * std::max(1.0, std::abs(xi)); }
double fd_step_hess(double xi) { return kHessStep * std::max(1.0, std::abs(xi)); }

Vec fd_gradient(const ScalarFn& f, const Vec& x, double h) {
  const int n = static_cast<int>(x.size());
  Vec g(n);
  Vec xp = x, xm = x;
  for (int i = 0; i < n; ++i) {
    const double hi = h > 0.0 ? h : fd_step_grad(x[i]);
    xp[i] = x[i] + hi;
    xm[i] = x[i] - hi;
    const double fp = checked(f(xp), "fd_gradient");
    const double fm = checked(f(xm), "fd_gradient");
    g[i] = (fp - fm) / (2.0 * hi);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

Mat fd_hessian(const ScalarFn& f, const Vec& x, double h) {
  const int n = static_cast<int>(x.size());
  Mat hess(n, n);
  const double f0 = checked(f(x), "fd_hessian");
  Vec step(n);
  for (int i = 0; i < n; ++i) step[i] = h > 0.0 ? h : fd_step_hess(x[i]);

  Vec xt = x;
  for (int i = 0; i < n; ++i) {
    xt[i] = x[i] + step[i];
    const double fp = checked(f(xt), "fd_hessian");
    xt[i] = x[i] - step[i];
    const double fm = checked(f(xt), "fd_hessian");
    xt[i] = x[i];
    hess(i, i) = (fp - 2.0 * f0 + fm) / (step[i] * step[i]);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      xt[i] = x[i] + step[i];
      xt[j] = x[j] + step[j];
      const double fpp = checked(f(xt), "fd_hessian");
      xt[j] = x[j] - step[j];
      const double fpm = checked(f(xt), "fd_hessian");
      xt[i] = x[i] - step[i];
      const double fmm = checked(f(xt), "fd_hessian");
      xt[j] = x[j] + step[j];
      const double fmp = checked(f(xt), "fd_hessian");
      xt[i] = x[i];
      xt[j] = x[j];
      const double v = (fpp - fpm - fmp + fmm) / (4.0 * step[i] * step[j]);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  // Symmetrized by construction; re-symmetrize to absorb roundoff.
  hess = 0.5 * (hess + hess.transpose()).eval();
  return hess;
}

Mat fd_jacobian(const VectorFn& f, const Vec& x, int out_dim, double h) {
  const int n = static_cast<int>(x.size());
  Mat jac(out_dim, n);
  Vec xp = x, xm = x;
  for (int j = 0; j < n; ++j) {
    const double hj = h > 0.0 ? h : fd_step_grad(x[j]);
    xp[j] = x[j] + hj;
    xm[j] = x[j] - hj;
    const Vec fp = f(xp);
    const Vec fm = f(xm);
    if (!fp.allFinite() || !fm.allFinite())
      throw EvaluationError("non-finite value in fd_jacobian");
    jac.col(j) = (fp - fm) / (2.0 * hj);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

Vec fd_matrix_divergence(const MatrixFn& m, const Vec& x, double h) {
  const int n = static_cast<int>(x.size());
  Vec div = Vec::Zero(n);
  Vec xp = x, xm = x;
  for (int j = 0; j < n; ++j) {
    const double hj = h > 0.0 ? h : fd_step_grad(x[j]);
    xp[j] = x[j] + hj;
    xm[j] = x[j] - hj;
    const Mat mp = m(xp);
    const Mat mm = m(xm);
    if (!mp.allFinite() || !mm.allFinite())
      throw EvaluationError("non-finite value in fd_matrix_divergence");
    div += (mp.col(j) - mm.col(j)) / (2.0 * hj);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return div;
}

}  // namespace effdyn
