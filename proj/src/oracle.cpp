#include "effdyn/oracle.hpp"

#include <cmath>
#include <numbers>

#include "effdyn/errors.hpp"
#include "effdyn/geometry.hpp"
#include "effdyn/quadrature.hpp"

namespace effdyn {

Vec chart_tangent(const FiberChart& chart, const Vec& z, double u) {
  const double h = 1e-6 * std::max(1.0, std::abs(u));
  return (chart.point(z, u + h) - chart.point(z, u - h)) / (2.0 * h);
}

double fiber_log_weight(const SystemSpec& spec, const FiberChart& chart,
                        const Vec& z, double u) {
  const Vec x = chart.point(z, u);
  const Mat jac = spec.xi_jac(x);
  const Mat gram = jac * jac.transpose();
  const double det = gram.determinant();
  if (!(det > 0.0))
    throw DegenerateCoordinateError("co-area factor degenerate on the fiber");
  const double tau = chart_tangent(chart, z, u).norm();
  return -spec.beta * spec.potential(x) - 0.5 * std::log(det) + std::log(tau);
}

namespace {

struct ChartWindow {
  double lo = 0.0, hi = 0.0;  // line charts
  bool periodic = false;
};

ChartWindow window(const FiberChart& chart, const Vec& z) {
  ChartWindow w;
  if (chart.kind == FiberChart::Kind::Circle) {
    w.periodic = true;
    return w;
  }
  if (!chart.center || !chart.halfwidth)
    throw UnsupportedGeometryError("line chart is missing its window callbacks");
  const double c = chart.center(z);
  const double hw = chart.halfwidth(z);
  w.lo = c - hw;
  w.hi = c + hw;
  return w;
}

// integral of g(x(u)) * exp(log_weight - shift) over the chart.
double weighted_integral(const SystemSpec& spec, const FiberChart& chart,
                         const Vec& z, const std::function<double(double)>& g,
                         double shift, double tol) {
  auto integrand = [&](double u) {
    return g(u) * std::exp(fiber_log_weight(spec, chart, z, u) - shift);
  };
  const ChartWindow w = window(chart, z);
  if (w.periodic)
    return periodic_trapezoid(integrand, 2.0 * std::numbers::pi, tol);
  return adaptive_simpson(integrand, w.lo, w.hi, tol);
}

double reference_shift(const SystemSpec& spec, const FiberChart& chart,
                       const Vec& z) {
  const ChartWindow w = window(chart, z);
  const double u0 = w.periodic ? 0.0 : 0.5 * (w.lo + w.hi);
  return fiber_log_weight(spec, chart, z, u0);
}

}  // namespace

double conditional_expectation(const SystemSpec& spec, const FiberChart& chart,
                               const Vec& z, const ScalarFn& f, double tol) {
  const double shift = reference_shift(spec, chart, z);
  const double mass = weighted_integral(
      spec, chart, z, [](double) { return 1.0; }, shift, tol);
  if (!(mass > 0.0))
    throw OracleError("fiber has vanishing mass at the requested level", tol);
  const double num = weighted_integral(
      spec, chart, z,
      [&](double u) { return f(chart.point(z, u)); }, shift, tol);
  return num / mass;
}

double fiber_mass(const SystemSpec& spec, const FiberChart& chart, const Vec& z,
                  double tol) {
  // One global shift (u = 0 at the level set's own center would vary with z);
  // the toys have O(1) exponents so no rescaling is needed.
  return weighted_integral(
      spec, chart, z, [](double) { return 1.0; }, 0.0, tol);
}

EffectiveModel quadrature_oracle(const SystemSpec& spec, const FiberChart& chart,
                                 const ZGrid& grid, const OracleOptions& opts) {
  if (grid.dim() != spec.m)
    throw ConfigError("oracle grid dimension must equal m");
  if (spec.m != 1)
    throw UnsupportedGeometryError(
        "quadrature oracle supports scalar reaction coordinates only");
  if (opts.z_wide_lo.size() != 1 || opts.z_wide_hi.size() != 1)
    throw ConfigError("oracle needs a wide z-box for normalization");

  EffectiveModel model;
  const long total = grid.size();
  model.grid = grid;
  model.m = spec.m;
  model.b.assign(total, Vec::Zero(1));
  model.phi_mean.assign(total, Mat::Zero(1, 1));
  model.sigma_node.assign(total, Mat::Zero(1, 1));
  model.Q.assign(total, 0.0);
  model.count.assign(total, 0);
  model.missing.assign(total, 0);

  // Z = integral of the fiber mass over the wide z-box. The inner integral
  // runs at a tighter tolerance than the outer one so its truncation noise
  // stays below the outer error estimates.
  const double inner_tol = std::min(opts.tol, 1e-12);
  const double z_norm = adaptive_simpson(
      [&](double zv) {
        return fiber_mass(spec, chart, Vec::Constant(1, zv), inner_tol);
      },
      opts.z_wide_lo[0], opts.z_wide_hi[0], std::max(opts.tol * 100.0, 1e-9));
  if (!(z_norm > 0.0))
    throw OracleError("marginal normalization vanished", opts.tol);

  for (long k = 0; k < total; ++k) {
    const Vec z = grid.node(k);
    model.b[k][0] = conditional_expectation(
        spec, chart, z,
        [&](const Vec& x) { return generator_on_xi(spec, 0, x); }, opts.tol);
    const double phi = conditional_expectation(
        spec, chart, z,
        [&](const Vec& x) { return phi_matrix(spec, x)(0, 0); }, opts.tol);
    model.phi_mean[k](0, 0) = phi;
    model.sigma_node[k] = spd_sqrt_clamped(model.phi_mean[k]);
    model.Q[k] = fiber_mass(spec, chart, z, opts.tol) / z_norm;
  }

  model.check_invariants();
  return model;
}

EffectiveModel quadrature_oracle(const BuiltinSystem& sys, const ZGrid& grid,
                                 double tol) {
  if (!sys.chart)
    throw UnsupportedGeometryError("built-in system '" + sys.name +
                                   "' supplies no fiber parameterization");
  OracleOptions opts;
  opts.tol = tol;
  opts.z_wide_lo = sys.z_wide_lo;
  opts.z_wide_hi = sys.z_wide_hi;
  return quadrature_oracle(sys.spec, *sys.chart, grid, opts);
}

EffectiveModel quadrature_oracle(const BuiltinSystem& sys, double tol) {
  return quadrature_oracle(sys, ZGrid(sys.grid_lo, sys.grid_hi, sys.grid_nodes),
                           tol);
}

}  // namespace effdyn
