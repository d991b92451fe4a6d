#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "effdyn/bounds.hpp"
#include "effdyn/sampler.hpp"

namespace effdyn {

struct SystemConfig {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

struct GridConfig {
  std::vector<double> lo, hi;
  std::vector<int> nodes;
  bool empty() const { return nodes.empty(); }
};

struct EstimationConfig {
  std::string method = "oracle";  // oracle | binned | fiber
  long fiber_steps = 200000;      // per-node steps in fiber mode
  long fiber_thinning = 10;
};

struct SweepConfig {
  std::string parameter;
  std::vector<double> values;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats = {"csv"};
  bool write_trajectories = false;
};

struct FrobeniusConfig {
  int count = 200;
  std::vector<double> box_lo, box_hi;  // empty: default box around x_init
};

struct BoundsConfig {
  std::string kind = "thm1";
  BoundParams params;
  BoundExtras extras;
  std::vector<double> t_values = {0.25, 0.5, 1.0};
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  SystemConfig system;
  IntegratorConfig integrator;
  GridConfig grid;  // empty: the system's default grid
  EstimationConfig estimation;
  std::optional<SweepConfig> sweep;
  double horizon = 1.0;
  OutputConfig output;
  double frobenius_tol = 1e-6;
  FrobeniusConfig frobenius;
  std::optional<BoundsConfig> bounds;
};

// Parsing reports the offending field path in the ConfigError message.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig config_from_file(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Spec invariants: registered system name, positive monotone sweep values,
// integrator sanity.
void validate_config(const ExperimentConfig& cfg);

}  // namespace effdyn
