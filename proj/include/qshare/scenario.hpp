#pragma once

#include "qshare/simulator.hpp"
#include "qshare/tuner.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qshare {

/// Parse or validation failure; `problems` lists every issue found.
class ScenarioError : public Error {
  public:
    explicit ScenarioError(std::vector<std::string> problems);

    const std::vector<std::string>& problems() const noexcept { return problems_; }

  private:
    std::vector<std::string> problems_;
};

/// Names of the channels written to CSV, in header order (after t and ibr).
const std::vector<std::string>& channel_names();

struct OutputSpec {
    std::string directory = "out";
    std::vector<std::string> channels;  // empty = all

    bool operator==(const OutputSpec&) const = default;
};

/// Everything a scenario file holds. The network is stored in per unit.
struct ScenarioFile {
    Scenario scenario;
    OutputSpec outputs;
    std::optional<TuningSpec> tuning;
};

bool operator==(const TuningSpec& a, const TuningSpec& b);
bool operator==(const ScenarioFile& a, const ScenarioFile& b);

/// Parses scenario text. `origin` names the source in error messages.
ScenarioFile parse_scenario(const std::string& text, const std::string& origin = "<scenario>");

/// Reads a file, or a bundled scenario when `path_or_name` matches one of bundled_scenarios().
ScenarioFile load_scenario(const std::string& path_or_name);

/// Text that parses back to an identical ScenarioFile.
std::string serialize_scenario(const ScenarioFile& f);

/// Controller section text ([ibrs] and [controller]) for a parameter set.
std::string serialize_controller(const ControllerParams& p);

std::vector<std::string> bundled_scenarios();
/// Throws ModelError for an unknown name.
std::string bundled_scenario_text(const std::string& name);

}  // namespace qshare
