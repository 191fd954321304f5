#pragma once

// JSON run configuration. Parameter and initial-state presets are expanded on
// load, so the echoed form is self-contained and reproduces the run.

#include "dhl/basin.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhl {

/// Validation failure naming the offending field as a dotted path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::invalid_argument("config field '" + field + "': " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct InitialState {
  enum class Kind { Explicit, Random };
  Kind kind = Kind::Explicit;
  BlochPair pair;  // Explicit (presets expand to this)
  std::string preset;  // "R_I" / "R_II" when the pair came from a preset
  std::uint64_t seed = 0;  // Random
  BallSampling sampling = BallSampling::UniformVolume;

  BlochPair resolve() const;
};

struct OutputPaths {
  std::string csv;
  std::string summary;
};

struct RunConfig {
  TrajectorySpec spec;
  InitialState initial;
  OutputPaths output;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);

/// Apply "a.b.c=value" overrides; the value is parsed as JSON when possible, else kept as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// Reads and parses a JSON file; throws ConfigError on I/O or syntax errors.
nlohmann::json load_json_file(const std::string& path);

nlohmann::json to_json(const TrajectorySummary& summary);
nlohmann::json to_json(const BasinEstimate& estimate);

}  // namespace dhl
