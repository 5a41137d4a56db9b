#pragma once

// Scenario definition files (JSON).

#include <stdexcept>
#include <string>

#include "ehrcov/scenarios.hpp"

namespace ehrcov::cli {

/// Malformed or inconsistent scenario file. The message starts with the file
/// name and, for schema errors, the JSON path of the offending value.
class ScenarioFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the document into a spec. `source` names the input in messages.
ScenarioSpec parse_scenario_spec(const std::string& text, const std::string& source = "<input>");

/// Reads, parses and builds the scenario through the same constructors as the
/// built-ins, so construction errors carry the file name.
Scenario load_scenario_file(const std::string& path, const SampleConfig& cfg = {});

/// A built-in name, or a path to a scenario file.
Scenario resolve_scenario(const std::string& name_or_path, const SampleConfig& cfg = {});

}  // namespace ehrcov::cli
