#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "tdcosim/harness/report.hpp"
#include "tdcosim/harness/runner.hpp"
#include "tdcosim/harness/scenario.hpp"

namespace tdcosim::harness {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  std::string expected;  // human-readable bound
  std::string detail;
};

nlohmann::json check_to_json(const CheckResult& c);

struct ScenarioOutcome {
  ScenarioSpec spec;
  RunReport cosim;
  RunReport mono;
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<CheckResult> checks;

  bool passed() const;
  std::vector<CheckResult> failures() const;
};

/// Delay expected for a step at `step_s`: the time from the step to the
/// co-simulation boundary that first samples it.
double expected_step_delay(double step_s, double dt_cosim_s);

/// Time of the first Step in the effective reference program; throws
/// ConfigError when there is none.
double first_step_time_s(const ScenarioSpec& spec);

/// Evaluates the scenario's checks plus report integrity. Fills metrics.
std::vector<CheckResult> evaluate_checks(const ScenarioSpec& spec, const RunReport& cosim, const RunReport& mono,
                                         nlohmann::json& metrics);

/// Runs the co-simulation and the monolithic oracle, then evaluates.
ScenarioOutcome run_scenario(const ScenarioSpec& spec, const RunOptions& options = {});

/// report.json, mono_report.json, signals.csv, metrics.json, der_outputs.csv
/// (when the fleet is not empty) and plots/*.svg.
void write_artifacts(const ScenarioOutcome& outcome, const std::filesystem::path& dir);

/// {"scenario", "passed", "failures": [...]}.
nlohmann::json failure_summary(const ScenarioOutcome& outcome);

}  // namespace tdcosim::harness
