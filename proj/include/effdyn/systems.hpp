#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "effdyn/system.hpp"

namespace effdyn {

// Parameterization of the (n-m)-dimensional fibers of a built-in system,
// used by the deterministic quadrature oracle and the spectral-gap
// estimator. Only 1-D fibers are chartable here.
struct FiberChart {
  enum class Kind { Line, Circle };
  Kind kind = Kind::Line;
  // x(z, u): ambient point at level z and fiber coordinate u.
  std::function<Vec(const Vec&, double)> point;
  // Line charts: suggested integration window center(z) +- halfwidth(z).
  std::function<double(const Vec&)> center;
  std::function<double(const Vec&)> halfwidth;
  // Circle charts use u in [0, 2*pi).
};

struct BuiltinSystem {
  std::string name;
  SystemSpec spec;
  std::optional<FiberChart> chart;
  // Default coefficient grid (per axis) and a wide box for normalizing Q.
  Vec grid_lo, grid_hi;
  std::vector<int> grid_nodes;
  Vec z_wide_lo, z_wide_hi;
  Vec x_init;  // reference starting point
};

// Registered names: "ou2d", "case1-linear", "case2-linear", "case3-linear",
// "radial2d", "twist3d". Unknown names raise ConfigError.
//
// Parameters (all optional, with defaults):
//   common:        beta (default 1)
//   case1-linear:  epsilon (0.1), K (1), coupling (1)
//   case2-linear:  delta (1), coupling (1)
//   case3-linear:  epsilon (0.1), delta (1), K (1), coupling (1)
//   radial2d:      a_diag ([1, 1])
BuiltinSystem make_builtin(const std::string& name,
                           const nlohmann::json& params = {});

std::vector<std::string> builtin_names();

}  // namespace effdyn
