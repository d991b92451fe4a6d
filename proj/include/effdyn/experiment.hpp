#pragma once

#include <optional>
#include <string>

#include "effdyn/config.hpp"
#include "effdyn/coupled.hpp"
#include "effdyn/oracle.hpp"
#include "effdyn/systems.hpp"

namespace effdyn {

std::string format_g17(double v);

// RFC-4180-style CSV: header row, constant column count, "\n" terminators,
// floats at full precision.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

BuiltinSystem system_from_config(const ExperimentConfig& cfg);
ZGrid grid_from_config(const BuiltinSystem& sys, const ExperimentConfig& cfg);

// Effective model per cfg.estimation: "oracle" (deterministic quadrature),
// "binned" or "fiber" (stochastic estimators fed by cfg.integrator).
EffectiveModel build_model(const BuiltinSystem& sys, const ExperimentConfig& cfg);

enum class CaseId { Case1, Case2, Case3 };

struct ScalingPoint {
  double parameter = 0.0;
  double dt = 0.0;
  double measured = 0.0;  // mean squared pathwise sup at the horizon
  double se = 0.0;
  bool ok = false;
  std::string error;
};

struct CaseResult {
  std::string system;
  std::string swept_parameter;
  std::vector<ScalingPoint> points;
  std::optional<ScalingFit> fit;  // absent when < 3 points succeeded
};

// Slow-fast case study: for each sweep value, builds the system and its
// effective model, co-simulates to the horizon, and fits the log-log slope
// of the mean squared sup-error against the swept parameter. The step size
// shrinks with the fast time scale (case2: dt <= delta/50, case3:
// dt <= eps*delta/(50 K)); burn-in time is held fixed across sweep points.
CaseResult run_case_experiment(CaseId id, const ExperimentConfig& cfg);

void write_case_csv(const CaseResult& result, const std::string& path);
void write_report_csv(const PathwiseErrorReport& report, const std::string& path);

struct PipelineResult {
  std::string directory;
  nlohmann::json manifest;
};

// Full run: model file + CSV, co-simulation report, optional scaling sweep
// and bound table, manifest with config hash and per-output checksums.
// Reruns with the same config reproduce every numeric output bit-for-bit.
PipelineResult run_pipeline(const ExperimentConfig& cfg);

}  // namespace effdyn
