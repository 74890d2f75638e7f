#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "drn/harness.hpp"

namespace drn {

/// Scenario files failing schema or invariant checks; carries one issue per field.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<ValidationIssue> issues);
  ScenarioError(const std::string& field, const std::string& message)
      : ScenarioError(std::vector<ValidationIssue>{{field, message}}) {}
  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

/// Command-line style replacements applied to the scenario document before parsing.
struct Overrides {
  std::optional<int> uavs;
  std::optional<int> steps;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma_r0_m;
  std::optional<double> sigma_b0_deg;
  std::optional<double> rho_m2;
  std::optional<int> n_chirp;
  std::optional<int> h_max;
  std::optional<double> r_max_m;  // +inf: fully connected
  std::optional<std::vector<std::string>> capabilities;

  /// "name=value" pairs of the overrides that are set, in a fixed order.
  std::vector<std::string> describe() const;
};

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Patches `doc` in place. Throws ScenarioError for overrides that cannot apply.
void apply_overrides(nlohmann::json& doc, const Overrides& overrides);

/// Parses and validates; throws ScenarioError listing every problem found.
Scenario scenario_from_json(const nlohmann::json& doc);

Scenario load_scenario(const std::filesystem::path& path, const Overrides& overrides = {});

/// Capability names: ranging, bearing, doppler.
Capabilities parse_capabilities(const std::vector<std::string>& names);

/// Shortest text that reads back to the same double; "inf"/"nan" for non-finite values.
std::string format_number(double value);

std::string sr_curve_csv(const MetricsReport& report);
std::string rmse_csv(const MetricsReport& report);
nlohmann::json metrics_json(const MetricsReport& report);
std::string trajectory_csv(const EpisodeLog& log);

}  // namespace drn
