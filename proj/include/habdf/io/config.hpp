#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "habdf/fusion.hpp"
#include "habdf/sim.hpp"

namespace habdf::io {

/// Invalid configuration: unknown key, wrong type, out-of-range value. The
/// message names the source, line and key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a command needs. Loaded from a flat key/value file:
///
///   # comment
///   seed = 7
///   model.accel_var = 0.05
///   fusion.gamma = 4, 1, 1
///   sensor.2.drift_rate = 0.004
///
/// See docs/config.md for the full key list.
struct RunConfig {
  std::uint64_t seed = 1;
  int frames = 1000;

  PipelineParams params;
  FusionConfig fusion;

  std::optional<double> xi;  // overrides the chi-squared derivation when set
  int dof = 0;               // 0: the measurement dimension
  double confidence = 0.95;

  SecondOrderPlant plant;
  SignalProfile signal;
  std::vector<FaultProfile> sensors;

  std::string output_summary;
};

RunConfig parse_config(std::istream& in, const std::string& origin);
RunConfig load_config(const std::filesystem::path& path);

/// Applies one `key = value` assignment with the same checks as the parser.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value,
                      const std::string& where);

/// All keys the parser accepts; sensor keys are listed with index N.
std::vector<std::string> config_keys();

/// The fusion config with xi resolved for a measurement of `axes` dimensions.
FusionConfig resolved_fusion(const RunConfig& config, int axes);

/// Simulation scenario (one measured axis) built from the config.
Scenario make_scenario(const RunConfig& config);

}  // namespace habdf::io
