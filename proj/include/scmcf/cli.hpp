#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "scmcf/flows.hpp"

namespace scmcf::cli {

enum class Scenario { Radial, Convexity, SelfIntersection, CustomCurve, CustomRevolution };

std::string to_string(Scenario s);

struct RadialParams {
  int d = 1;
  double R0 = 1.0;
  /// Total mass; defaults to alpha_d R0^d, i.e. unit concentration.
  std::optional<double> mass;
  std::size_t N = 256;
};

struct CustomCurveParams {
  std::vector<Vec2> nodes;
  std::vector<double> concentration;
  Orientation orientation = Orientation::NormalLeftOfTangent;
};

struct CustomRevolutionParams {
  std::vector<double> x;
  std::vector<double> w;
  std::vector<double> concentration;
  Closure closure = Closure::CappedEnds;
  double period = 0.0;
};

/// Checked quantities and their default thresholds.
struct Tolerances {
  double mass_drift = 1e-4;
  double energy_increase = 1e-10;
  double min_c_decrease = 1e-10;
  double dissipation_residual = 0.05;
  double radial_oracle = 1e-3;
  double mean_convexity = 1e-8;
};

struct TestHooks {
  /// Multiply the concentration by (1 + mass_perturbation) once, after step perturb_at_step.
  double mass_perturbation = 0.0;
  long perturb_at_step = 1;
};

struct RunConfig {
  Scenario scenario = Scenario::Radial;
  EnergyDensity density = EnergyDensity::constant(1.0);
  std::variant<RadialParams, ConvexityScenarioParams, SelfIntersectionScenarioParams, CustomCurveParams,
               CustomRevolutionParams>
      params;
  double t_end = 0.1;
  double dt = 1e-3;
  int monitor_every = 10;
  bool snapshots = true;
  std::filesystem::path output_dir = "scmcf_out";
  StepperSettings stepper;
  Tolerances tolerances;
  std::vector<std::string> stop_on;
  TestHooks hooks;
};

/// Parses the documented configuration tree. Any unknown key or ill-typed value throws ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// The configuration schema with every key and its default, as a JSON document.
nlohmann::json default_config(Scenario scenario);

struct InvariantResult {
  std::string name;
  bool passed = true;
  double worst = 0.0;
  double tolerance = 0.0;
};

struct Outcome {
  int exit_code = 0;
  std::vector<InvariantResult> invariants;
  std::vector<Event> events;
  nlohmann::json final_state;
};

/// Builds the initial state described by the config (including the parabolicity guard).
FlowState initial_state(const RunConfig& cfg);

/// Runs the scenario and writes series.csv, snapshots/NNNN.csv, events.json and summary.json
/// into cfg.output_dir. Exit code 0 when every invariant held, 2 otherwise.
Outcome execute(const RunConfig& cfg);

/// Loads and runs one config file. Configuration and domain errors map to exit code 1.
int run_config(const std::filesystem::path& path, const std::optional<std::filesystem::path>& out_override,
               bool quiet);

/// Command-line entry point (--config, --quiet, --seed, --out, --sweep, --threads).
int main(int argc, char** argv);

}  // namespace scmcf::cli
