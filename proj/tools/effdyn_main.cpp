#include <CLI11.hpp>
#include <fstream>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "effdyn/errors.hpp"
#include "effdyn/experiment.hpp"
#include "effdyn/geometry.hpp"
#include "effdyn/model_io.hpp"
#include "effdyn/stats.hpp"

namespace {

using namespace effdyn;
namespace fs = std::filesystem;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed_flag = -1;
};

// Precedence: EFFDYN_SEED environment variable > --seed flag > config file.
ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig cfg = config_from_file(args.config_path);
  if (args.seed_flag >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed_flag);
  if (const char* env = std::getenv("EFFDYN_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
      throw ConfigError("EFFDYN_SEED must be a nonnegative integer");
    cfg.seed = v;
  }
  cfg.integrator.seed = cfg.seed;
  if (!args.out_dir.empty()) cfg.output.directory = args.out_dir;
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("--seed", args.seed_flag, "override the config seed");
  cmd->add_option("--out", args.out_dir, "override the output directory");
}

int cmd_simulate(const ExperimentConfig& cfg) {
  const BuiltinSystem sys = system_from_config(cfg);
  fs::create_directories(cfg.output.directory);

  X0Source x0{X0Source::Mode::Equilibrium, sys.x_init};
  std::vector<RunningStats> xi_stats(sys.spec.m);
  std::vector<std::ofstream> dumps;
  if (cfg.output.write_trajectories) {
    for (int r = 0; r < cfg.integrator.n_replicas; ++r) {
      dumps.emplace_back(fs::path(cfg.output.directory) /
                         ("trajectory_r" + std::to_string(r) + ".csv"));
      dumps.back() << "t";
      for (int i = 1; i <= sys.spec.n; ++i) dumps.back() << ",x" << i;
      for (int i = 1; i <= sys.spec.m; ++i) dumps.back() << ",xi" << i;
      dumps.back() << "\n";
    }
  }
  long recorded = 0;
  simulate_full(sys.spec, cfg.integrator, x0,
                [&](int replica, long, double t, const Vec& x, const Vec& z) {
                  ++recorded;
                  for (int i = 0; i < sys.spec.m; ++i) xi_stats[i].add(z[i]);
                  if (!dumps.empty()) {
                    auto& out = dumps[replica];
                    out << format_g17(t);
                    for (int i = 0; i < sys.spec.n; ++i)
                      out << "," << format_g17(x[i]);
                    for (int i = 0; i < sys.spec.m; ++i)
                      out << "," << format_g17(z[i]);
                    out << "\n";
                  }
                });
  std::cout << "system " << sys.name << ": " << recorded
            << " recorded states over " << cfg.integrator.n_replicas
            << " replicas\n";
  for (int i = 0; i < sys.spec.m; ++i)
    std::cout << "xi" << i + 1 << ": mean " << xi_stats[i].mean() << " sd "
              << xi_stats[i].stddev() << "\n";
  return 0;
}

int cmd_coefficients(const ExperimentConfig& cfg) {
  const BuiltinSystem sys = system_from_config(cfg);
  const EffectiveModel model = build_model(sys, cfg);
  fs::create_directories(cfg.output.directory);
  const fs::path dir(cfg.output.directory);
  save_model(model, (dir / "model.effdyn").string());
  export_model_csv(model, (dir / "model.csv").string());
  const LipschitzEstimate lip = estimate_lipschitz(model);
  std::cout << "model: " << model.grid.size() << " nodes, q-mass "
            << model.q_mass() << "\n";
  std::cout << "grid Lipschitz lower bounds: L_b " << lip.L_b << ", L_sigma "
            << lip.L_sigma << ", L_d " << lip.L_d << "\n";
  std::cout << "wrote " << (dir / "model.effdyn").string() << " and "
            << (dir / "model.csv").string() << "\n";
  return 0;
}

int cmd_cosim(const ExperimentConfig& cfg) {
  const BuiltinSystem sys = system_from_config(cfg);
  const EffectiveModel model = build_model(sys, cfg);
  CosimConfig cosim;
  cosim.integ = cfg.integrator;
  cosim.integ.n_steps = std::llround(cfg.horizon / cfg.integrator.dt);
  cosim.integ.thinning =
      std::max<long>(1, cosim.integ.n_steps / 50);
  cosim.x0.mode = X0Source::Mode::Equilibrium;
  cosim.x0.point = sys.x_init;
  const PathwiseErrorReport report = cosimulate(sys.spec, model, cosim);
  fs::create_directories(cfg.output.directory);
  const std::string path =
      (fs::path(cfg.output.directory) / "cosim.csv").string();
  write_report_csv(report, path);
  std::cout << "t " << report.times.back() << ": mean sq sup "
            << report.final_mean_sq_sup() << " (se " << report.final_se_sq_sup()
            << "), excursion steps " << report.excursion_steps
            << (report.flagged_unreliable ? " [UNRELIABLE: >1% clamped]" : "")
            << "\n";
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_scaling(const ExperimentConfig& cfg, const std::string& case_name) {
  CaseId id;
  if (case_name == "case1") id = CaseId::Case1;
  else if (case_name == "case2") id = CaseId::Case2;
  else if (case_name == "case3") id = CaseId::Case3;
  else throw ConfigError("--case must be case1, case2 or case3");

  const CaseResult result = run_case_experiment(id, cfg);
  fs::create_directories(cfg.output.directory);
  const std::string path =
      (fs::path(cfg.output.directory) / "scaling.csv").string();
  write_case_csv(result, path);
  for (const auto& p : result.points)
    std::cout << result.swept_parameter << " " << p.parameter << ": "
              << (p.ok ? format_g17(p.measured) : p.error) << "\n";
  if (result.fit)
    std::cout << "log-log slope " << result.fit->slope << " (se "
              << result.fit->slope_se << ")\n";
  else
    std::cout << "fewer than 3 points succeeded; fit skipped\n";
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_frobenius(const ExperimentConfig& cfg) {
  const BuiltinSystem sys = system_from_config(cfg);
  const int n = sys.spec.n;
  Vec lo(n), hi(n);
  if (!cfg.frobenius.box_lo.empty()) {
    if (static_cast<int>(cfg.frobenius.box_lo.size()) != n ||
        static_cast<int>(cfg.frobenius.box_hi.size()) != n)
      throw ConfigError("frobenius box dimensions do not match the system");
    for (int i = 0; i < n; ++i) {
      lo[i] = cfg.frobenius.box_lo[i];
      hi[i] = cfg.frobenius.box_hi[i];
    }
  } else {
    lo = sys.x_init.array() - 0.5;
    hi = sys.x_init.array() + 0.5;
  }

  fs::create_directories(cfg.output.directory);
  const std::string path =
      (fs::path(cfg.output.directory) / "frobenius.csv").string();
  std::vector<std::vector<std::string>> rows;
  NoiseStream noise(cfg.seed, 0, StreamTag::Scatter);
  double worst = 0.0;
  for (int k = 0; k < cfg.frobenius.count; ++k) {
    Vec x(n);
    for (int i = 0; i < n; ++i) {
      const double u = noise.uniform(static_cast<std::uint64_t>(k),
                                     static_cast<std::uint32_t>(i));
      x[i] = lo[i] + (hi[i] - lo[i]) * u;
    }
    const FrobeniusResult res = frobenius_obstruction(sys.spec, x);
    worst = std::max(worst, res.residual);
    std::vector<std::string> row;
    for (int i = 0; i < n; ++i) row.push_back(format_g17(x[i]));
    row.push_back(format_g17(res.residual));
    rows.push_back(row);
  }
  std::vector<std::string> header;
  for (int i = 1; i <= n; ++i) header.push_back("x" + std::to_string(i));
  header.push_back("residual");
  write_csv(path, header, rows);
  std::cout << "max residual " << worst << " over " << cfg.frobenius.count
            << " points (threshold " << cfg.frobenius_tol << ")\n";
  std::cout << "wrote " << path << "\n";
  return worst <= cfg.frobenius_tol ? 0 : 1;
}

int cmd_bounds(const ExperimentConfig& cfg) {
  if (!cfg.bounds) throw ConfigError("config has no 'bounds' section");
  std::cout << "t,bound\n";
  for (double t : cfg.bounds->t_values) {
    BoundQuery q;
    q.params = cfg.bounds->params;
    q.extras = cfg.bounds->extras;
    q.t = t;
    const std::string& kind = cfg.bounds->kind;
    if (kind == "prop1") q.kind = BoundKind::Prop1;
    else if (kind == "thm1") q.kind = BoundKind::Thm1;
    else if (kind == "thm2_density") q.kind = BoundKind::Thm2Density;
    else if (kind == "thm2_fixed") q.kind = BoundKind::Thm2Fixed;
    else if (kind == "diss_contractive") q.kind = BoundKind::DissContractive;
    else if (kind == "diss_expansive") q.kind = BoundKind::DissExpansive;
    else throw ConfigError("unknown bounds.kind '" + kind + "'");
    std::cout << format_g17(t) << "," << format_g17(theorem_bound(q)) << "\n";
  }
  if (cfg.bounds->kind == "thm2_density" || cfg.bounds->kind == "thm2_fixed")
    std::cerr << "note: results conditional on the supplied alpha and "
                 "chi-square inputs\n";
  return 0;
}

int cmd_pipeline(const ExperimentConfig& cfg) {
  const PipelineResult result = run_pipeline(cfg);
  std::cout << "run directory: " << result.directory << "\n";
  std::cout << result.manifest.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"effective-dynamics construction and validation harness"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string case_name;

  auto* simulate = app.add_subcommand("simulate", "sample the full dynamics");
  add_common(simulate, args);
  auto* coefficients =
      app.add_subcommand("coefficients", "estimate the effective model");
  add_common(coefficients, args);
  auto* cosim = app.add_subcommand(
      "cosim", "co-simulate the full and effective processes");
  add_common(cosim, args);
  auto* scaling = app.add_subcommand("scaling", "slow-fast scaling study");
  add_common(scaling, args);
  scaling->add_option("--case", case_name, "case1 | case2 | case3")->required();
  auto* frobenius = app.add_subcommand(
      "frobenius", "sample the integrability obstruction residual");
  add_common(frobenius, args);
  auto* bounds = app.add_subcommand("bounds", "evaluate closed-form bounds");
  add_common(bounds, args);
  auto* pipeline = app.add_subcommand("pipeline", "full run with manifest");
  add_common(pipeline, args);

  CLI11_PARSE(app, argc, argv);

  std::string stage = "setup";
  try {
    const ExperimentConfig cfg = load_config(args);
    if (simulate->parsed()) { stage = "simulate"; return cmd_simulate(cfg); }
    if (coefficients->parsed()) { stage = "coefficients"; return cmd_coefficients(cfg); }
    if (cosim->parsed()) { stage = "cosim"; return cmd_cosim(cfg); }
    if (scaling->parsed()) { stage = "scaling"; return cmd_scaling(cfg, case_name); }
    if (frobenius->parsed()) { stage = "frobenius"; return cmd_frobenius(cfg); }
    if (bounds->parsed()) { stage = "bounds"; return cmd_bounds(cfg); }
    if (pipeline->parsed()) { stage = "pipeline"; return cmd_pipeline(cfg); }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const effdyn::Error& e) {
    std::cerr << "stage '" << stage << "' failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
