#include "effdyn/config.hpp"

#include <algorithm>
#include <fstream>

#include "effdyn/errors.hpp"
#include "effdyn/systems.hpp"

namespace effdyn {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_number(const json& j, const std::string& path, double fallback) {
  if (j.is_null()) return fallback;
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

long get_integer(const json& j, const std::string& path, long fallback) {
  if (j.is_null()) return fallback;
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long>();
}

std::vector<double> get_number_list(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) fail(path, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

template <typename T>
T field(const json& j, const char* key, T fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if constexpr (std::is_same_v<T, double>) return get_number(*v, key, fallback);
  if constexpr (std::is_same_v<T, long>) return get_integer(*v, key, fallback);
  if constexpr (std::is_same_v<T, int>)
    return static_cast<int>(get_integer(*v, key, fallback));
  if constexpr (std::is_same_v<T, bool>) {
    if (!v->is_boolean()) fail(key, "expected a boolean");
    return v->get<bool>();
  }
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v->is_string()) fail(key, "expected a string");
    return v->get<std::string>();
  }
}

IntegratorConfig parse_integrator(const json& j) {
  IntegratorConfig cfg;
  cfg.dt = field(j, "dt", cfg.dt);
  cfg.n_steps = field(j, "n_steps", cfg.n_steps);
  cfg.n_replicas = field(j, "n_replicas", static_cast<long>(cfg.n_replicas));
  cfg.burn_in_steps = field(j, "burn_in_steps", cfg.burn_in_steps);
  cfg.thinning = field(j, "thinning", cfg.thinning);
  return cfg;
}

json integrator_to_json(const IntegratorConfig& cfg) {
  return json{{"dt", cfg.dt},
              {"n_steps", cfg.n_steps},
              {"n_replicas", cfg.n_replicas},
              {"burn_in_steps", cfg.burn_in_steps},
              {"thinning", cfg.thinning}};
}

BoundParams parse_bound_params(const json& j) {
  BoundParams p;
  p.kappa1 = field(j, "kappa1", p.kappa1);
  p.kappa2 = field(j, "kappa2", p.kappa2);
  p.rho = field(j, "rho", p.rho);
  p.L_b = field(j, "L_b", p.L_b);
  p.L_sigma = field(j, "L_sigma", p.L_sigma);
  p.L_d = field(j, "L_d", p.L_d);
  p.alpha = field(j, "alpha", p.alpha);
  p.beta = field(j, "beta", p.beta);
  p.C1_sup_phi = field(j, "C1_sup_phi", p.C1_sup_phi);
  p.C2_sup_A = field(j, "C2_sup_A", p.C2_sup_A);
  return p;
}

json bound_params_to_json(const BoundParams& p) {
  return json{{"kappa1", p.kappa1},   {"kappa2", p.kappa2},
              {"rho", p.rho},         {"L_b", p.L_b},
              {"L_sigma", p.L_sigma}, {"L_d", p.L_d},
              {"alpha", p.alpha},     {"beta", p.beta},
              {"C1_sup_phi", p.C1_sup_phi}, {"C2_sup_A", p.C2_sup_A}};
}

BoundExtras parse_extras(const json& j) {
  BoundExtras e;
  if (const json* v = find(j, "chi2")) e.chi2 = get_number(*v, "bounds.extras.chi2", 0.0);
  if (const json* v = find(j, "t0")) e.t0 = get_number(*v, "bounds.extras.t0", 0.0);
  if (const json* v = find(j, "t1")) e.t1 = get_number(*v, "bounds.extras.t1", 0.0);
  if (const json* v = find(j, "p_t0_sq"))
    e.p_t0_sq = get_number(*v, "bounds.extras.p_t0_sq", 0.0);
  if (const json* v = find(j, "v1")) e.v1 = get_number(*v, "bounds.extras.v1", 0.0);
  if (const json* v = find(j, "v2")) e.v2 = get_number(*v, "bounds.extras.v2", 0.0);
  return e;
}

json extras_to_json(const BoundExtras& e) {
  json j = json::object();
  if (e.chi2) j["chi2"] = *e.chi2;
  if (e.t0) j["t0"] = *e.t0;
  if (e.t1) j["t1"] = *e.t1;
  if (e.p_t0_sq) j["p_t0_sq"] = *e.p_t0_sq;
  if (e.v1) j["v1"] = *e.v1;
  if (e.v2) j["v2"] = *e.v2;
  return j;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  ExperimentConfig cfg;

  if (const json* v = find(j, "seed")) {
    if (!v->is_number_integer()) fail("seed", "expected an integer");
    cfg.seed = v->get<std::uint64_t>();
  }

  const json* sys = find(j, "system");
  if (!sys || !sys->is_object()) fail("system", "required object missing");
  if (const json* name = find(*sys, "name")) {
    if (!name->is_string()) fail("system.name", "expected a string");
    cfg.system.name = name->get<std::string>();
  } else {
    fail("system.name", "required string missing");
  }
  if (const json* p = find(*sys, "params")) {
    if (!p->is_object()) fail("system.params", "expected an object");
    cfg.system.params = *p;
  }

  if (const json* v = find(j, "integrator")) {
    if (!v->is_object()) fail("integrator", "expected an object");
    cfg.integrator = parse_integrator(*v);
  }
  cfg.integrator.seed = cfg.seed;

  if (const json* v = find(j, "grid")) {
    if (!v->is_object()) fail("grid", "expected an object");
    cfg.grid.lo = get_number_list((*v)["lo"], "grid.lo");
    cfg.grid.hi = get_number_list((*v)["hi"], "grid.hi");
    if (const json* n = find(*v, "nodes")) {
      if (!n->is_array()) fail("grid.nodes", "expected an array of integers");
      for (const auto& e : *n) {
        if (!e.is_number_integer()) fail("grid.nodes", "expected integers");
        cfg.grid.nodes.push_back(e.get<int>());
      }
    }
    if (cfg.grid.lo.size() != cfg.grid.hi.size() ||
        cfg.grid.lo.size() != cfg.grid.nodes.size())
      fail("grid", "lo, hi and nodes must have equal lengths");
  }

  if (const json* v = find(j, "estimation")) {
    if (!v->is_object()) fail("estimation", "expected an object");
    cfg.estimation.method = field(*v, "method", cfg.estimation.method);
    cfg.estimation.fiber_steps = field(*v, "fiber_steps", cfg.estimation.fiber_steps);
    cfg.estimation.fiber_thinning =
        field(*v, "fiber_thinning", cfg.estimation.fiber_thinning);
  }

  if (const json* v = find(j, "sweep")) {
    if (!v->is_object()) fail("sweep", "expected an object");
    SweepConfig sweep;
    sweep.parameter = field(*v, "parameter", std::string());
    if (const json* vals = find(*v, "values"))
      sweep.values = get_number_list(*vals, "sweep.values");
    cfg.sweep = sweep;
  }

  cfg.horizon = field(j, "horizon", cfg.horizon);

  if (const json* v = find(j, "output")) {
    if (!v->is_object()) fail("output", "expected an object");
    cfg.output.directory = field(*v, "directory", cfg.output.directory);
    cfg.output.write_trajectories =
        field(*v, "write_trajectories", cfg.output.write_trajectories);
    if (const json* fm = find(*v, "formats")) {
      if (!fm->is_array()) fail("output.formats", "expected an array");
      cfg.output.formats.clear();
      for (const auto& e : *fm) cfg.output.formats.push_back(e.get<std::string>());
    }
  }

  cfg.frobenius_tol = field(j, "frobenius_tol", cfg.frobenius_tol);
  if (const json* v = find(j, "frobenius")) {
    if (!v->is_object()) fail("frobenius", "expected an object");
    cfg.frobenius.count = field(*v, "count", cfg.frobenius.count);
    if (const json* lo = find(*v, "box_lo"))
      cfg.frobenius.box_lo = get_number_list(*lo, "frobenius.box_lo");
    if (const json* hi = find(*v, "box_hi"))
      cfg.frobenius.box_hi = get_number_list(*hi, "frobenius.box_hi");
  }

  if (const json* v = find(j, "bounds")) {
    if (!v->is_object()) fail("bounds", "expected an object");
    BoundsConfig b;
    b.kind = field(*v, "kind", b.kind);
    if (const json* p = find(*v, "params")) b.params = parse_bound_params(*p);
    if (const json* e = find(*v, "extras")) b.extras = parse_extras(*e);
    if (const json* t = find(*v, "t_values"))
      b.t_values = get_number_list(*t, "bounds.t_values");
    cfg.bounds = b;
  }

  validate_config(cfg);
  return cfg;
}

ExperimentConfig config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["system"] = json{{"name", cfg.system.name}, {"params", cfg.system.params}};
  j["integrator"] = integrator_to_json(cfg.integrator);
  if (!cfg.grid.empty())
    j["grid"] = json{{"lo", cfg.grid.lo}, {"hi", cfg.grid.hi}, {"nodes", cfg.grid.nodes}};
  j["estimation"] = json{{"method", cfg.estimation.method},
                         {"fiber_steps", cfg.estimation.fiber_steps},
                         {"fiber_thinning", cfg.estimation.fiber_thinning}};
  if (cfg.sweep)
    j["sweep"] = json{{"parameter", cfg.sweep->parameter},
                      {"values", cfg.sweep->values}};
  j["horizon"] = cfg.horizon;
  j["output"] = json{{"directory", cfg.output.directory},
                     {"formats", cfg.output.formats},
                     {"write_trajectories", cfg.output.write_trajectories}};
  j["frobenius_tol"] = cfg.frobenius_tol;
  j["frobenius"] = json{{"count", cfg.frobenius.count},
                        {"box_lo", cfg.frobenius.box_lo},
                        {"box_hi", cfg.frobenius.box_hi}};
  if (cfg.bounds)
    j["bounds"] = json{{"kind", cfg.bounds->kind},
                       {"params", bound_params_to_json(cfg.bounds->params)},
                       {"extras", extras_to_json(cfg.bounds->extras)},
                       {"t_values", cfg.bounds->t_values}};
  return j;
}

void validate_config(const ExperimentConfig& cfg) {
  const auto names = builtin_names();
  if (std::find(names.begin(), names.end(), cfg.system.name) == names.end())
    throw ConfigError("config field 'system.name': unknown system '" +
                      cfg.system.name + "'");
  validate(cfg.integrator);
  if (cfg.horizon <= 0.0)
    throw ConfigError("config field 'horizon': must be positive");
  if (cfg.estimation.method != "oracle" && cfg.estimation.method != "binned" &&
      cfg.estimation.method != "fiber")
    throw ConfigError(
        "config field 'estimation.method': must be oracle, binned or fiber");
  if (cfg.sweep) {
    if (cfg.sweep->values.empty())
      throw ConfigError("config field 'sweep.values': must be nonempty");
    for (double v : cfg.sweep->values)
      if (!(v > 0.0))
        throw ConfigError("config field 'sweep.values': must be positive");
    const bool increasing = std::is_sorted(cfg.sweep->values.begin(),
                                           cfg.sweep->values.end());
    const bool decreasing = std::is_sorted(cfg.sweep->values.rbegin(),
                                           cfg.sweep->values.rend());
    auto strict = [&](auto begin, auto end) {
      return std::adjacent_find(begin, end) == end;
    };
    if (!(increasing || decreasing) ||
        !strict(cfg.sweep->values.begin(), cfg.sweep->values.end()))
      throw ConfigError(
          "config field 'sweep.values': must be strictly monotone");
  }
  if (cfg.frobenius_tol <= 0.0)
    throw ConfigError("config field 'frobenius_tol': must be positive");
}

}  // namespace effdyn
