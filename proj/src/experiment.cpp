#include "effdyn/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "effdyn/errors.hpp"
#include "effdyn/model_io.hpp"
#include "effdyn/stats.hpp"

namespace effdyn {

namespace {

constexpr const char* kVersion = "effdyn 1.0.0";

nlohmann::json merged_params(const ExperimentConfig& cfg,
                             const std::string& key, double value) {
  nlohmann::json params = cfg.system.params;
  params[key] = value;
  return params;
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open CSV for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "");
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw ConfigError("CSV row width disagrees with the header");
    for (std::size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "");
    out << "\n";
  }
}

BuiltinSystem system_from_config(const ExperimentConfig& cfg) {
  return make_builtin(cfg.system.name, cfg.system.params);
}

ZGrid grid_from_config(const BuiltinSystem& sys, const ExperimentConfig& cfg) {
  if (cfg.grid.empty())
    return ZGrid(sys.grid_lo, sys.grid_hi, sys.grid_nodes);
  const int dim = static_cast<int>(cfg.grid.nodes.size());
  Vec lo(dim), hi(dim);
  for (int d = 0; d < dim; ++d) {
    lo[d] = cfg.grid.lo[d];
    hi[d] = cfg.grid.hi[d];
  }
  return ZGrid(lo, hi, cfg.grid.nodes);
}

EffectiveModel build_model(const BuiltinSystem& sys, const ExperimentConfig& cfg) {
  const ZGrid grid = grid_from_config(sys, cfg);
  if (cfg.estimation.method == "oracle") return quadrature_oracle(sys, grid);

  EstimationOptions opts;
  opts.method = cfg.estimation.method == "fiber" ? EstimationMethod::Fiber
                                                 : EstimationMethod::Binned;
  opts.trajectory = cfg.integrator;
  opts.trajectory.seed = cfg.seed;
  opts.x0.mode = X0Source::Mode::Equilibrium;
  opts.x0.point = sys.x_init;
  opts.fiber = cfg.integrator;
  opts.fiber.seed = cfg.seed + 1;
  opts.fiber.n_steps = cfg.estimation.fiber_steps;
  opts.fiber.thinning = cfg.estimation.fiber_thinning;
  opts.fiber.n_replicas = 1;
  return estimate_effective(sys.spec, opts, grid);
}

namespace {

struct CasePlan {
  std::string system;
  std::string swept;
  double dt_cap_scale = 0.0;  // dt <= scale(value); 0 means config dt
};

double case_dt(CaseId id, const ExperimentConfig& cfg, double value) {
  const double base = cfg.integrator.dt;
  if (id == CaseId::Case1) return base;
  const auto& p = cfg.system.params;
  const double K = p.value("K", 1.0);
  if (id == CaseId::Case2) return std::min(base, value / 50.0);
  // Case3: the fast scale is eps*delta/K; one of (eps, delta) is swept.
  const std::string swept = cfg.sweep ? cfg.sweep->parameter : "delta";
  const double eps = swept == "epsilon" ? value : p.value("epsilon", 0.1);
  const double delta = swept == "delta" ? value : p.value("delta", 0.1);
  return std::min(base, eps * delta / (50.0 * K));
}

}  // namespace

CaseResult run_case_experiment(CaseId id, const ExperimentConfig& cfg) {
  CaseResult result;
  std::string swept;
  switch (id) {
    case CaseId::Case1:
      result.system = "case1-linear";
      swept = "epsilon";
      break;
    case CaseId::Case2:
      result.system = "case2-linear";
      swept = "delta";
      break;
    case CaseId::Case3:
      result.system = "case3-linear";
      swept = cfg.sweep ? cfg.sweep->parameter : "delta";
      if (swept != "epsilon" && swept != "delta")
        throw ConfigError("case3 sweeps 'epsilon' or 'delta'");
      break;
  }
  result.swept_parameter = swept;

  std::vector<double> values;
  if (cfg.sweep) {
    if (!cfg.sweep->parameter.empty() && cfg.sweep->parameter != swept &&
        id != CaseId::Case3)
      throw ConfigError("sweep parameter '" + cfg.sweep->parameter +
                        "' does not match the case study");
    values = cfg.sweep->values;
  } else {
    values = {0.2, 0.1, 0.05, 0.02};
  }

  // Burn-in time held fixed across the sweep (step counts change with dt).
  const double burn_time =
      cfg.integrator.burn_in_steps >= 0
          ? cfg.integrator.burn_in_steps * cfg.integrator.dt
          : 4.0;

  for (double value : values) {
    ScalingPoint point;
    point.parameter = value;
    try {
      ExperimentConfig local = cfg;
      local.system.name = result.system;
      local.system.params = merged_params(cfg, swept, value);

      const double dt = case_dt(id, cfg, value);
      point.dt = dt;
      const BuiltinSystem sys = system_from_config(local);
      const EffectiveModel model = build_model(sys, local);

      CosimConfig cosim;
      cosim.integ = cfg.integrator;
      cosim.integ.seed = cfg.seed;
      cosim.integ.dt = dt;
      cosim.integ.n_steps = std::llround(cfg.horizon / dt);
      cosim.integ.burn_in_steps = std::llround(burn_time / dt);
      cosim.integ.thinning = std::max<long>(1, cosim.integ.n_steps / 20);
      cosim.x0.mode = X0Source::Mode::Equilibrium;
      cosim.x0.point = sys.x_init;

      const PathwiseErrorReport report = cosimulate(sys.spec, model, cosim);
      point.measured = report.final_mean_sq_sup();
      point.se = report.final_se_sq_sup();
      point.ok = true;
    } catch (const Error& e) {
      point.error = e.what();
    }
    result.points.push_back(point);
  }

  std::vector<std::pair<double, double>> fit_points;
  for (const auto& p : result.points)
    if (p.ok && p.measured > 0.0) fit_points.emplace_back(p.parameter, p.measured);
  if (fit_points.size() >= 3) result.fit = fit_scaling(fit_points);
  return result;
}

void write_case_csv(const CaseResult& result, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : result.points) {
    rows.push_back({result.swept_parameter, format_g17(p.parameter),
                    format_g17(p.dt), format_g17(p.measured), format_g17(p.se),
                    p.ok ? "ok" : p.error});
  }
  write_csv(path, {"parameter", "value", "dt", "mean_sq_sup", "se", "status"},
            rows);
}

void write_report_csv(const PathwiseErrorReport& report, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t j = 0; j < report.times.size(); ++j) {
    rows.push_back({format_g17(report.times[j]),
                    format_g17(report.mean_sq_sup[j]),
                    format_g17(report.se_sq_sup[j]),
                    format_g17(report.marginal_mse[j]),
                    format_g17(report.se_marginal[j]),
                    std::to_string(report.excursion_steps)});
  }
  write_csv(path,
            {"t", "mean_sq_sup", "se_sup", "marginal_mse", "se_marginal",
             "excursions"},
            rows);
}

PipelineResult run_pipeline(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const auto t_start = std::chrono::steady_clock::now();

  fs::create_directories(cfg.output.directory);
  const fs::path dir(cfg.output.directory);

  nlohmann::json outputs = nlohmann::json::object();
  auto record_file = [&outputs](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(buf.str())));
    outputs[p.filename().string()] = hex;
  };

  const BuiltinSystem sys = system_from_config(cfg);
  const EffectiveModel model = build_model(sys, cfg);
  save_model(model, (dir / "model.effdyn").string());
  export_model_csv(model, (dir / "model.csv").string());
  record_file(dir / "model.effdyn");
  record_file(dir / "model.csv");

  CosimConfig cosim;
  cosim.integ = cfg.integrator;
  cosim.integ.seed = cfg.seed;
  cosim.integ.n_steps = std::llround(cfg.horizon / cfg.integrator.dt);
  cosim.integ.thinning = std::max<long>(1, cosim.integ.n_steps / 50);
  cosim.x0.mode = X0Source::Mode::Equilibrium;
  cosim.x0.point = sys.x_init;
  const PathwiseErrorReport report = cosimulate(sys.spec, model, cosim);
  write_report_csv(report, (dir / "cosim.csv").string());
  record_file(dir / "cosim.csv");

  if (cfg.sweep) {
    std::optional<CaseId> id;
    if (cfg.system.name == "case1-linear") id = CaseId::Case1;
    if (cfg.system.name == "case2-linear") id = CaseId::Case2;
    if (cfg.system.name == "case3-linear") id = CaseId::Case3;
    if (id) {
      const CaseResult scaling = run_case_experiment(*id, cfg);
      write_case_csv(scaling, (dir / "scaling.csv").string());
      record_file(dir / "scaling.csv");
    }
  }

  if (cfg.bounds) {
    std::vector<std::vector<std::string>> rows;
    for (double t : cfg.bounds->t_values) {
      BoundQuery q;
      q.params = cfg.bounds->params;
      q.extras = cfg.bounds->extras;
      q.t = t;
      if (cfg.bounds->kind == "prop1") q.kind = BoundKind::Prop1;
      else if (cfg.bounds->kind == "thm1") q.kind = BoundKind::Thm1;
      else if (cfg.bounds->kind == "thm2_density") q.kind = BoundKind::Thm2Density;
      else if (cfg.bounds->kind == "thm2_fixed") q.kind = BoundKind::Thm2Fixed;
      else if (cfg.bounds->kind == "diss_contractive")
        q.kind = BoundKind::DissContractive;
      else if (cfg.bounds->kind == "diss_expansive")
        q.kind = BoundKind::DissExpansive;
      else throw ConfigError("unknown bounds.kind '" + cfg.bounds->kind + "'");
      rows.push_back({format_g17(t), format_g17(theorem_bound(q))});
    }
    write_csv((dir / "bounds.csv").string(), {"t", "bound"}, rows);
    record_file(dir / "bounds.csv");
  }

  const auto t_end = std::chrono::steady_clock::now();
  const double wall =
      std::chrono::duration<double>(t_end - t_start).count();

  const std::string canonical = config_to_json(cfg).dump();
  char cfg_hash[20];
  std::snprintf(cfg_hash, sizeof(cfg_hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical)));

  PipelineResult result;
  result.directory = cfg.output.directory;
  result.manifest = nlohmann::json{{"version", kVersion},
                                   {"config_hash", cfg_hash},
                                   {"seed", cfg.seed},
                                   {"wall_clock_sec", wall},
                                   {"outputs", outputs}};
  std::ofstream mf(dir / "manifest.json");
  mf << result.manifest.dump(2) << "\n";
  return result;
}

}  // namespace effdyn
