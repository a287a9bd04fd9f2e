#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "prsbc/sim.hpp"

namespace prsbc {

/// Parses a scenario document. Unknown keys, wrong types and out-of-range
/// values raise ScenarioError; the result is validated.
Scenario scenario_from_json(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json scenario_to_json(const Scenario& scenario);

ControllerKind parse_controller(const std::string& name);
RadiusConvention parse_convention(const std::string& name);
const char* to_string(RadiusConvention convention);

/// One row per robot per step: step, time_s, robot_id, true position,
/// measured position, nominal control, safe control, solver_status.
void write_trajectory_csv(std::ostream& out, const Scenario& scenario,
                          const TrajectoryLog& log);

/// `config` is echoed verbatim under the "config" key.
nlohmann::json metrics_to_json(const Metrics& metrics,
                               const nlohmann::json& config);
nlohmann::json aggregate_to_json(const AggregateMetrics& agg,
                                 const nlohmann::json& config);

/// printf("%.9g")
std::string format_number(double value);

}  // namespace prsbc
