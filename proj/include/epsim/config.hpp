#pragma once

// Experiment configuration: a JSON document (".cfg") with nested sections
// mirroring the type tree. Every problem is reported with its field path,
// e.g. "circuit.components[2].ratio".

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "epsim/analysis.hpp"
#include "epsim/components.hpp"
#include "epsim/detection.hpp"
#include "epsim/error.hpp"
#include "epsim/source.hpp"

namespace epsim {

inline constexpr int kSchemaVersion = 1;

struct SweepConfig {
  double power_start_mw = 0.0;
  double power_stop_mw = 800.0;
  int points = 41;
  double duration_per_point_s = 10.0;
};

struct TomographyConfig {
  double phase_power_mw = 200.0;
  double duration_per_setting_s = 60.0;
  int bootstrap_resamples = 100;
};

struct CircuitConfig {
  Device device = Device::B;
  PhaseShifterCalibration calibration;
  SpdcParams spdc;
  double hwp_efficiency = 0.99;  // conversion probability of each integrated HWP
  std::array<QpmParams, 2> qpm;
  std::vector<ComponentSpec> components;  // appended after the device
};

struct NoiseConfig {
  NoiseParams params;
  std::array<DetectorModel, 2> detectors;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  CircuitConfig circuit;
  SweepConfig sweep;
  TomographyConfig tomography;
  WavelengthGrid shg_grid;
  NoiseConfig noise;
  std::uint64_t seed = 42;
  std::string outputs = "out";
};

struct ConfigIssue {
  std::string path;
  std::string message;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

struct ConfigParse {
  ExperimentConfig config;
  std::vector<ConfigIssue> issues;
  bool ok() const noexcept { return issues.empty(); }
};

// Never throws on content problems; they land in `issues`.
ConfigParse parse_config_text(const std::string& text);
ConfigParse parse_config_file(const std::filesystem::path& path);

// Throws ConfigError when any issue is found, std::ios_base::failure when unreadable.
ExperimentConfig load_config(const std::filesystem::path& path);

std::string to_json_text(const ExperimentConfig& cfg);

}  // namespace epsim
