#include "effdyn/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "effdyn/errors.hpp"
#include "effdyn/geometry.hpp"
#include "effdyn/oracle.hpp"

namespace effdyn {

namespace {

// Fiber mobility in the chart coordinate:
//   D(u) = (a Pi t) . (Pi t) / (beta |tau|^2),  t = tau / |tau|.
// Strictly positive by ellipticity and |Pi t| >= |t|.
double fiber_mobility(const SystemSpec& spec, const FiberChart& chart,
                      const Vec& z, double u) {
  const Vec x = chart.point(z, u);
  const Vec tau = chart_tangent(chart, z, u);
  const double norm2 = tau.squaredNorm();
  const Vec t_hat = tau / std::sqrt(norm2);
  const Mat pi = projection_pi(spec, x);
  const Vec pt = pi * t_hat;
  const Mat a = mobility_at(spec, x);
  return pt.dot(a * pt) / (spec.beta * norm2);
}

double spectral_gap(const SystemSpec& spec, const FiberChart& chart,
                    const Vec& z, int n, double lo, double hi, bool periodic) {
  const double h = periodic ? (hi - lo) / n : (hi - lo) / (n - 1);
  std::vector<double> lw(n), d(n);
  double lw_max = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double u = lo + k * h;
    lw[k] = fiber_log_weight(spec, chart, z, u);
    d[k] = fiber_mobility(spec, chart, z, u);
    lw_max = std::max(lw_max, lw[k]);
    if (!(d[k] > 0.0))
      throw NumericError("fiber mobility is not positive on the grid");
  }
  for (double& v : lw) v -= lw_max;

  // Symmetrized finite-volume operator with geometric-mean face weights:
  // only local log-weight differences enter, so stiff weights stay
  // well-conditioned.
  Mat s = Mat::Zero(n, n);
  auto couple = [&](int k, int kn) {
    const double face_d = std::sqrt(d[k] * d[kn]);
    const double off = -face_d / (h * h);
    s(k, kn) += off;
    s(kn, k) += off;
    s(k, k) += face_d * std::exp(0.5 * (lw[kn] - lw[k])) / (h * h);
    s(kn, kn) += face_d * std::exp(0.5 * (lw[k] - lw[kn])) / (h * h);
  };
  for (int k = 0; k + 1 < n; ++k) couple(k, k + 1);
  if (periodic) couple(n - 1, 0);

  Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericError("eigen-solve failed in estimate_rho");
  const Vec ev = es.eigenvalues();
  const double gap = ev[1];
  if (!(gap > 0.0) || std::abs(ev[0]) > 1e-6 * gap)
    throw NumericError("fiber generator discretization lost its null mode");
  return gap;
}

}  // namespace

RhoEstimate estimate_rho(const SystemSpec& spec, const FiberChart& chart,
                         const Vec& z, const RhoOptions& opts) {
  if (spec.n - spec.m != 1)
    throw UnsupportedGeometryError(
        "estimate_rho needs a 1-dimensional fiber; supply rho externally "
        "otherwise");
  if (opts.n_nodes < 32) throw ConfigError("estimate_rho needs >= 32 nodes");

  double lo = 0.0, hi = 2.0 * std::numbers::pi;
  bool periodic = chart.kind == FiberChart::Kind::Circle;
  if (!periodic) {
    const double c = chart.center(z);
    const double hw = chart.halfwidth(z);
    // Window from the local curvature of the log-weight; the chart halfwidth
    // caps it.
    const double du = 1e-3 * hw;
    const double curv = -(fiber_log_weight(spec, chart, z, c + du) -
                          2.0 * fiber_log_weight(spec, chart, z, c) +
                          fiber_log_weight(spec, chart, z, c - du)) /
                        (du * du);
    double half = hw;
    if (curv > 0.0) half = std::min(hw, opts.box_sds / std::sqrt(curv));
    lo = c - half;
    hi = c + half;
  }

  RhoEstimate est;
  est.rho = spectral_gap(spec, chart, z, opts.n_nodes, lo, hi, periodic);
  est.rho_coarse = spectral_gap(spec, chart, z, opts.n_nodes / 2, lo, hi, periodic);
  est.refinement_rel_diff = std::abs(est.rho - est.rho_coarse) / est.rho;
  return est;
}

RhoEstimate estimate_rho(const BuiltinSystem& sys, const Vec& z,
                         const RhoOptions& opts) {
  if (!sys.chart)
    throw UnsupportedGeometryError("built-in system '" + sys.name +
                                   "' supplies no fiber parameterization");
  return estimate_rho(sys.spec, *sys.chart, z, opts);
}

double min_rho_over(const BuiltinSystem& sys, const std::vector<Vec>& levels,
                    const RhoOptions& opts) {
  if (levels.empty()) throw ConfigError("min_rho_over needs at least one level");
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& z : levels) best = std::min(best, estimate_rho(sys, z, opts).rho);
  return best;
}

}  // namespace effdyn
