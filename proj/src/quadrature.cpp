#include "effdyn/quadrature.hpp"

#include <cmath>
#include <vector>

#include "effdyn/errors.hpp"

namespace effdyn {

namespace {

struct SimpsonWork {
  const Integrand* f;
  double tol_fail = 0.0;  // worst interval tolerance actually achieved
  bool failed = false;
};

double simpson_rec(SimpsonWork& w, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = (*w.f)(lm);
  const double frm = (*w.f)(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double err = left + right - whole;
  if (std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
  if (depth <= 0) {
    w.failed = true;
    w.tol_fail = std::max(w.tol_fail, std::abs(err) / 15.0);
    return left + right + err / 15.0;
  }
  return simpson_rec(w, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(w, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const Integrand& f, double a, double b, double tol,
                        int max_depth) {
  if (!(a < b)) return 0.0;
  SimpsonWork w{&f};
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double value = simpson_rec(w, a, b, fa, fm, fb, whole, tol, max_depth);
  if (!std::isfinite(value))
    throw OracleError("adaptive quadrature produced a non-finite value",
                      std::numeric_limits<double>::infinity());
  if (w.failed)
    throw OracleError("adaptive quadrature did not reach requested tolerance",
                      w.tol_fail);
  return value;
}

double periodic_trapezoid(const Integrand& f, double period, double tol,
                          int max_doublings) {
  int n = 16;
  double h = period / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += f(i * h);
  double value = sum * h;
  for (int d = 0; d < max_doublings; ++d) {
    double extra = 0.0;
    for (int i = 0; i < n; ++i) extra += f((i + 0.5) * h);
    const double next = 0.5 * value + extra * 0.5 * h;
    n *= 2;
    h *= 0.5;
    const double change = std::abs(next - value);
    value = next;
    if (change <= tol * std::max(1.0, std::abs(value))) return value;
  }
  throw OracleError("periodic quadrature did not converge", tol);
}

}  // namespace effdyn
