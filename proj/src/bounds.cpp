#include "effdyn/bounds.hpp"

#include <cmath>

#include "effdyn/errors.hpp"
#include "effdyn/stats.hpp"

namespace effdyn {

namespace {

double sup_bound_rate(const BoundParams& p) {
  return 3.0 * p.L_b * p.L_b + 48.0 * p.L_sigma * p.L_sigma / p.beta + 1.0;
}

double first_power_rate(const BoundParams& p) {
  return 1.5 * p.L_b * p.L_b + 24.0 * p.L_sigma * p.L_sigma / p.beta + 0.5;
}

double first_power_prefactor(const BoundParams& p) {
  return 9.0 * p.kappa1 / (std::sqrt(2.0 * p.beta) * p.rho) +
         12.0 * p.kappa2 / (p.beta * std::sqrt(p.rho));
}

double dissipative_bracket(const BoundParams& p, double v1, double v2) {
  return (p.kappa1 * p.kappa1 / (2.0 * v1) +
          2.0 * p.kappa2 * p.kappa2 / p.beta * (1.0 + 1.0 / v2)) /
         (p.beta * p.rho);
}

}  // namespace

double theorem_bound(const BoundQuery& q) {
  q.params.validate();
  const BoundParams& p = q.params;
  if (q.t < 0.0) throw QueryError("bound horizon t must be nonnegative");

  switch (q.kind) {
    case BoundKind::Prop1: {
      const double inner =
          p.kappa1 * p.kappa1 * q.t + 32.0 * p.kappa2 * p.kappa2 / p.beta;
      return 3.0 * q.t / (p.beta * p.rho) * inner *
             std::exp(sup_bound_rate(p) * q.t);
    }
    case BoundKind::Thm1: {
      const double inner = 27.0 * p.kappa1 * p.kappa1 / (2.0 * p.rho) +
                           32.0 * p.kappa2 * p.kappa2 / p.beta;
      return 3.0 * q.t / (p.beta * p.rho) * inner *
             std::exp(sup_bound_rate(p) * q.t);
    }
    case BoundKind::Thm2Density: {
      if (!q.extras.chi2) throw QueryError("Thm2Density needs extras.chi2");
      if (*q.extras.chi2 < 0.0) throw QueryError("chi2 must be nonnegative");
      return std::sqrt(q.t) * first_power_prefactor(p) *
             std::sqrt(*q.extras.chi2) * std::exp(first_power_rate(p) * q.t);
    }
    case BoundKind::Thm2Fixed: {
      if (!q.extras.t0 || !q.extras.t1 || !q.extras.p_t0_sq)
        throw QueryError("Thm2Fixed needs extras t0, t1 and p_t0_sq");
      const double t0 = *q.extras.t0;
      const double t1 = *q.extras.t1;
      if (!(t0 > 0.0) || t1 < t0 || t1 > q.t)
        throw QueryError("Thm2Fixed needs 0 < t0 <= t1 <= t");
      const double density_term =
          1.0 + std::exp(-p.alpha * (t1 - t0)) * std::sqrt(*q.extras.p_t0_sq);
      const double early = std::sqrt(t1) * (3.0 * p.C1_sup_phi * std::sqrt(t1) +
                                            18.0 * p.C2_sup_A / std::sqrt(p.beta));
      return (std::sqrt(q.t) * first_power_prefactor(p) * density_term + early) *
             std::exp(first_power_rate(p) * q.t);
    }
    case BoundKind::DissContractive: {
      if (!q.extras.v1 || !q.extras.v2)
        throw QueryError("dissipative bounds need extras v1 and v2");
      const double v1 = *q.extras.v1, v2 = *q.extras.v2;
      if (v1 <= 0.0 || v2 <= 0.0) throw QueryError("v1, v2 must be positive");
      if (p.L_d <= p.L_sigma * p.L_sigma / p.beta)
        throw RegimeError(
            "contractive bound needs L_d > L_sigma^2 / beta; use the "
            "expansive form");
      const double c =
          p.L_d - p.L_sigma * p.L_sigma * (1.0 + v2) / p.beta - 0.5 * v1;
      if (c <= 0.0)
        throw RegimeError("chosen (v1, v2) do not keep the contraction positive");
      return dissipative_bracket(p, v1, v2) / c * (1.0 - std::exp(-2.0 * c * q.t));
    }
    case BoundKind::DissExpansive: {
      if (!q.extras.v1 || !q.extras.v2)
        throw QueryError("dissipative bounds need extras v1 and v2");
      const double v1 = *q.extras.v1, v2 = *q.extras.v2;
      if (v1 <= 0.0 || v2 <= 0.0) throw QueryError("v1, v2 must be positive");
      const double c =
          p.L_sigma * p.L_sigma * (1.0 + v2) / p.beta - p.L_d + 0.5 * v1;
      if (c <= 0.0)
        throw RegimeError("expansive form needs a positive growth constant");
      return dissipative_bracket(p, v1, v2) / c * (std::exp(2.0 * c * q.t) - 1.0);
    }
  }
  throw QueryError("unknown bound kind");
}

double theorem_bound_min_t1(const BoundQuery& q, std::span<const double> t1_grid) {
  if (q.kind != BoundKind::Thm2Fixed)
    throw QueryError("t1 optimization applies to Thm2Fixed only");
  if (t1_grid.empty()) throw QueryError("empty t1 grid");
  double best = std::numeric_limits<double>::infinity();
  for (double t1 : t1_grid) {
    BoundQuery local = q;
    local.extras.t1 = t1;
    best = std::min(best, theorem_bound(local));
  }
  return best;
}

DissipativeChoice minimize_dissipative(const BoundQuery& q, int grid_n) {
  if (q.kind != BoundKind::DissContractive && q.kind != BoundKind::DissExpansive)
    throw QueryError("(v1, v2) optimization applies to dissipative bounds only");
  if (grid_n < 2) throw QueryError("dissipative grid needs >= 2 points");
  DissipativeChoice best;
  best.bound = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= grid_n; ++i) {
    for (int j = 1; j <= grid_n; ++j) {
      BoundQuery local = q;
      local.extras.v1 = 4.0 * i / grid_n;
      local.extras.v2 = 4.0 * j / grid_n;
      try {
        const double b = theorem_bound(local);
        if (b < best.bound) {
          best.bound = b;
          best.v1 = *local.extras.v1;
          best.v2 = *local.extras.v2;
        }
      } catch (const RegimeError&) {
        // infeasible corner of the grid
      }
    }
  }
  if (!std::isfinite(best.bound))
    throw RegimeError("no feasible (v1, v2) on the grid");
  return best;
}

GronwallResult gronwall_bound(std::span<const double> ts,
                              std::span<const double> gs, double C1, double C2,
                              double t) {
  if (C1 < 0.0 || C2 < 0.0) throw QueryError("Gronwall constants must be >= 0");
  if (ts.size() != gs.size() || ts.size() < 2)
    throw QueryError("Gronwall bound needs a tabulated g with >= 2 points");
  if (ts.front() > 0.0 || ts.back() < t)
    throw QueryError("g must be tabulated over [0, t]");

  const double rate = C1 + C2 + 1.0;

  // g(t) from the table (linear interpolation between nodes).
  auto g_at = [&](double s) {
    std::size_t k = 1;
    while (k + 1 < ts.size() && ts[k] < s) ++k;
    const double w = (s - ts[k - 1]) / (ts[k] - ts[k - 1]);
    return gs[k - 1] + w * (gs[k] - gs[k - 1]);
  };
  const double g_t = g_at(t);

  GronwallResult result;
  result.nondecreasing_form = g_t * std::exp(rate * t);

  double integral = 0.0;
  double prev_s = ts[0];
  double prev_v = std::exp(rate * (t - prev_s)) * gs[0];
  for (std::size_t k = 1; k < ts.size() && prev_s < t; ++k) {
    const double s = std::min(ts[k], t);
    const double v = std::exp(rate * (t - s)) * g_at(s);
    integral += 0.5 * (prev_v + v) * (s - prev_s);
    prev_s = s;
    prev_v = v;
  }
  result.integral_form = g_t + (C1 + C2) * integral;
  return result;
}

ScalingFit fit_scaling(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3)
    throw EstimationError("scaling fit needs at least 3 points");
  std::vector<double> lx, ly;
  for (const auto& [param, value] : points) {
    if (!(param > 0.0) || !(value > 0.0))
      throw EstimationError("scaling fit needs positive measurements");
    lx.push_back(std::log(param));
    ly.push_back(std::log(value));
  }
  const LinearFit fit = least_squares(lx, ly);
  return {fit.slope, fit.slope_se, fit.intercept};
}

}  // namespace effdyn
