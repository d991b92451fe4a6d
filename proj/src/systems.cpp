#include "effdyn/systems.hpp"

#include <cmath>

#include "effdyn/errors.hpp"

namespace effdyn {

namespace {

using nlohmann::json;

double param(const json& p, const char* key, double fallback) {
  if (!p.contains(key)) return fallback;
  if (!p[key].is_number()) throw ConfigError(std::string("system parameter '") + key + "' must be a number");
  return p[key].get<double>();
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

void set_grid_1d(BuiltinSystem& sys, double lo, double hi, int nodes,
                 double wide_lo, double wide_hi) {
  sys.grid_lo = Vec::Constant(1, lo);
  sys.grid_hi = Vec::Constant(1, hi);
  sys.grid_nodes = {nodes};
  sys.z_wide_lo = Vec::Constant(1, wide_lo);
  sys.z_wide_hi = Vec::Constant(1, wide_hi);
}

// Shared skeleton for the planar systems with xi = x1 and state x = (z, y).
void fill_linear_xi(SystemSpec& spec) {
  spec.xi = [](const Vec& x) { return Vec::Constant(1, x[0]); };
  spec.xi_jac = [](const Vec& x) {
    Mat j = Mat::Zero(1, x.size());
    j(0, 0) = 1.0;
    return j;
  };
  spec.xi_hess = [](const Vec& x, int) { return Mat::Zero(x.size(), x.size()); };
}

FiberChart line_chart(double center_slope, double center_scale, double halfwidth) {
  // center(z) = center_slope * z / center_scale
  FiberChart chart;
  chart.kind = FiberChart::Kind::Line;
  chart.point = [](const Vec& z, double u) { return vec2(z[0], u); };
  chart.center = [center_slope, center_scale](const Vec& z) {
    return center_slope * z[0] / center_scale;
  };
  chart.halfwidth = [halfwidth](const Vec&) { return halfwidth; };
  return chart;
}

BuiltinSystem make_ou2d(const json& p) {
  const double beta = param(p, "beta", 1.0);
  BuiltinSystem sys;
  sys.name = "ou2d";
  sys.spec.n = 2;
  sys.spec.m = 1;
  sys.spec.n_prime = 2;
  sys.spec.beta = beta;
  sys.spec.potential = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  sys.spec.potential_grad = [](const Vec& x) { return x; };
  sys.spec.sigma = [](const Vec& x) { return Mat::Identity(x.size(), x.size()); };
  sys.spec.mobility = [](const Vec& x) { return Mat::Identity(x.size(), x.size()); };
  sys.spec.mobility_div = [](const Vec& x) { return Vec::Zero(x.size()); };
  fill_linear_xi(sys.spec);

  sys.chart = line_chart(0.0, 1.0, 14.0 / std::sqrt(beta));
  const double s = 1.0 / std::sqrt(beta);
  set_grid_1d(sys, -3.0 * s, 3.0 * s, 61, -9.0 * s, 9.0 * s);
  sys.x_init = vec2(0.0, 0.0);
  return sys;
}

// Potential V(z, y) = z^2/2 + coupling (y - z)^2/2 + stiff K y^2 / (2 eps),
// mobility diag(1, 1/delta). Covers the three slow-fast planar cases:
//   case1: delta = 1, stiff on      (stiff potential)
//   case2: delta < 1, stiff off     (fast mobility)
//   case3: delta < 1, stiff on      (both)
BuiltinSystem make_planar_case(const std::string& name, const json& p,
                               bool stiff, bool fast_mobility) {
  const double beta = param(p, "beta", 1.0);
  const double gamma = param(p, "coupling", 1.0);
  const double eps = stiff ? param(p, "epsilon", 0.1) : 0.0;
  const double stiff_k = stiff ? param(p, "K", 1.0) : 0.0;
  const double delta = fast_mobility ? param(p, "delta", 1.0) : 1.0;
  if (stiff && (eps <= 0.0 || stiff_k <= 0.0))
    throw ConfigError(name + ": epsilon and K must be positive");
  if (delta <= 0.0) throw ConfigError(name + ": delta must be positive");
  if (gamma < 0.0) throw ConfigError(name + ": coupling must be nonnegative");

  const double stiffness = stiff ? stiff_k / eps : 0.0;  // in the y-potential
  if (gamma + stiffness <= 0.0)
    throw ConfigError(name + ": fiber potential is not confining");

  BuiltinSystem sys;
  sys.name = name;
  sys.spec.n = 2;
  sys.spec.m = 1;
  sys.spec.n_prime = 2;
  sys.spec.beta = beta;
  sys.spec.potential = [gamma, stiffness](const Vec& x) {
    const double z = x[0], y = x[1];
    return 0.5 * z * z + 0.5 * gamma * (y - z) * (y - z) +
           0.5 * stiffness * y * y;
  };
  sys.spec.potential_grad = [gamma, stiffness](const Vec& x) {
    const double z = x[0], y = x[1];
    return vec2(z + gamma * (z - y), gamma * (y - z) + stiffness * y);
  };
  sys.spec.sigma = [delta](const Vec&) {
    Mat s = Mat::Identity(2, 2);
    s(1, 1) = 1.0 / std::sqrt(delta);
    return s;
  };
  sys.spec.mobility = [delta](const Vec&) {
    Mat a = Mat::Identity(2, 2);
    a(1, 1) = 1.0 / delta;
    return a;
  };
  sys.spec.mobility_div = [](const Vec& x) { return Vec::Zero(x.size()); };
  fill_linear_xi(sys.spec);

  // Conditional law y | z is Gaussian with mean gamma z / (gamma + stiffness)
  // and variance 1 / (beta (gamma + stiffness)).
  const double curv = gamma + stiffness;
  const double sd_y = 1.0 / std::sqrt(beta * curv);
  sys.chart = line_chart(gamma, curv, 14.0 * sd_y);

  const double sd_z = 1.0 / std::sqrt(beta);  // upper bound on the z-marginal sd
  set_grid_1d(sys, -3.5 * sd_z, 3.5 * sd_z, 71, -10.0 * sd_z, 10.0 * sd_z);
  sys.x_init = vec2(0.0, 0.0);
  return sys;
}

BuiltinSystem make_radial2d(const json& p) {
  const double beta = param(p, "beta", 1.0);
  double ax = 1.0, ay = 1.0;
  if (p.contains("a_diag")) {
    const auto& d = p["a_diag"];
    if (!d.is_array() || d.size() != 2)
      throw ConfigError("radial2d: a_diag must be an array of two numbers");
    ax = d[0].get<double>();
    ay = d[1].get<double>();
    if (ax <= 0.0 || ay <= 0.0)
      throw ConfigError("radial2d: a_diag entries must be positive");
  }

  BuiltinSystem sys;
  sys.name = "radial2d";
  sys.spec.n = 2;
  sys.spec.m = 1;
  sys.spec.n_prime = 2;
  sys.spec.beta = beta;
  sys.spec.potential = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  sys.spec.potential_grad = [](const Vec& x) { return x; };
  sys.spec.sigma = [ax, ay](const Vec&) {
    Mat s = Mat::Zero(2, 2);
    s(0, 0) = std::sqrt(ax);
    s(1, 1) = std::sqrt(ay);
    return s;
  };
  sys.spec.mobility = [ax, ay](const Vec&) {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = ax;
    a(1, 1) = ay;
    return a;
  };
  sys.spec.mobility_div = [](const Vec& x) { return Vec::Zero(x.size()); };
  sys.spec.xi = [](const Vec& x) { return Vec::Constant(1, x.norm()); };
  sys.spec.xi_jac = [](const Vec& x) {
    const double r = x.norm();
    Mat j(1, 2);
    j << x[0] / r, x[1] / r;
    return j;
  };
  sys.spec.xi_hess = [](const Vec& x, int) {
    const double r = x.norm();
    const Vec u = x / r;
    return ((Mat::Identity(2, 2) - u * u.transpose()) / r).eval();
  };

  FiberChart chart;
  chart.kind = FiberChart::Kind::Circle;
  chart.point = [](const Vec& z, double u) {
    return vec2(z[0] * std::cos(u), z[0] * std::sin(u));
  };
  sys.chart = chart;

  const double s = 1.0 / std::sqrt(beta);
  set_grid_1d(sys, 0.05 * s, 4.0 * s, 80, 1e-6, 10.0 * s);
  sys.x_init = vec2(s, 0.0);
  return sys;
}

// m = 2 integrability counterexample: xi = (x1, x2 + x1 x3) with a = I has
// commutator B_12 = (0, 0, 1), which leaves span{a grad(xi)}.
BuiltinSystem make_twist3d(const json& p) {
  const double beta = param(p, "beta", 1.0);
  BuiltinSystem sys;
  sys.name = "twist3d";
  sys.spec.n = 3;
  sys.spec.m = 2;
  sys.spec.n_prime = 3;
  sys.spec.beta = beta;
  sys.spec.potential = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  sys.spec.potential_grad = [](const Vec& x) { return x; };
  sys.spec.sigma = [](const Vec& x) { return Mat::Identity(x.size(), x.size()); };
  sys.spec.mobility = [](const Vec& x) { return Mat::Identity(x.size(), x.size()); };
  sys.spec.mobility_div = [](const Vec& x) { return Vec::Zero(x.size()); };
  sys.spec.xi = [](const Vec& x) {
    Vec z(2);
    z << x[0], x[1] + x[0] * x[2];
    return z;
  };
  sys.spec.xi_jac = [](const Vec& x) {
    Mat j(2, 3);
    j << 1.0, 0.0, 0.0, x[2], 1.0, x[0];
    return j;
  };
  sys.spec.xi_hess = [](const Vec&, int i) {
    Mat h = Mat::Zero(3, 3);
    if (i == 1) {
      h(0, 2) = 1.0;
      h(2, 0) = 1.0;
    }
    return h;
  };

  sys.grid_lo = vec2(-2.0, -2.0);
  sys.grid_hi = vec2(2.0, 2.0);
  sys.grid_nodes = {21, 21};
  sys.z_wide_lo = vec2(-8.0, -8.0);
  sys.z_wide_hi = vec2(8.0, 8.0);
  sys.x_init = Vec::Zero(3);
  sys.x_init << 1.0, 0.0, 0.5;
  return sys;
}

}  // namespace

BuiltinSystem make_builtin(const std::string& name, const json& params) {
  if (name == "ou2d") return make_ou2d(params);
  if (name == "case1-linear") return make_planar_case(name, params, true, false);
  if (name == "case2-linear") return make_planar_case(name, params, false, true);
  if (name == "case3-linear") return make_planar_case(name, params, true, true);
  if (name == "radial2d") return make_radial2d(params);
  if (name == "twist3d") return make_twist3d(params);
  throw ConfigError("unknown built-in system '" + name + "'");
}

std::vector<std::string> builtin_names() {
  return {"ou2d", "case1-linear", "case2-linear", "case3-linear", "radial2d",
          "twist3d"};
}

}  // namespace effdyn
