#pragma once

// Experiment runners behind the CLI verbs. Each runner simulates its data
// set from an ExperimentConfig, analyses it and, when an output directory is
// given, writes its artifacts there. Outputs are a pure function of
// (config, seed).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "epsim/analysis.hpp"
#include "epsim/config.hpp"

namespace epsim {

struct RunOptions {
  std::filesystem::path out_dir;  // empty: nothing is written
  bool ideal = false;             // --no-noise
  std::optional<std::uint64_t> seed;
  std::optional<double> phase_power_mw;  // tomography only
};

// Ideal mode: no dark counts, zero coincidence window, expected counts
// instead of samples, fully coherent source, perfect waveplates.
ExperimentConfig ideal_config(ExperimentConfig cfg);

// Detection probabilities of one named outcome at a given heater power.
// Device a: "11", "02", "20". Device b: "++", "+-", "HH" or any "XY" pair
// of {H, V, D, A, R, L}; "+"/"-" stand for D/A.
OutcomeProbabilities outcome_probabilities(const ExperimentConfig& cfg, double phase_power_mw,
                                           const std::string& label);

// --- sweep ---------------------------------------------------------------

struct SweepResult {
  std::vector<FringeDataset> datasets;
  std::vector<FringeFit> fits;
  std::vector<std::filesystem::path> files;
  bool runtime_flag = false;  // some fit failed to converge
};

std::vector<std::string> sweep_labels(Device d);
SweepResult run_sweep(const ExperimentConfig& cfg, const RunOptions& opt = {});

std::string fringe_csv_header();
void write_fringe_csv(const std::filesystem::path& path, const FringeDataset& data);
// Throws InvalidArgument on malformed content, std::ios_base::failure when unreadable.
FringeDataset read_fringe_csv(const std::filesystem::path& path);

// --- tomography -------------------------------------------------------------

struct ValueWithError {
  double value = 0.0;
  double error = 0.0;
};

struct TomographyReport {
  double phase_power_mw = 0.0;
  std::vector<TomographySetting> settings;
  std::vector<CountRecord> records;
  TomographyResult mle;
  BellState target = BellState::PhiPlus;  // nearest Bell state of the estimate
  ValueWithError fidelity;
  ValueWithError purity;
  ValueWithError concurrence;
  ValueWithError witness;
  std::array<Correlation, 3> correlations;  // XX, YY, ZZ
  double significance = 0.0;                // (S - 1) / bootstrap sigma
  int bootstrap_resamples = 0;
  int bootstrap_failures = 0;
  std::vector<std::filesystem::path> files;
  bool runtime_flag = false;  // MLE hit its iteration cap or bootstrap failures
};

TomographyReport run_tomography(const ExperimentConfig& cfg, const RunOptions& opt = {});

std::string format_density_matrix(const DensityMatrix4& rho);

// --- shg -------------------------------------------------------------------

struct ShgReport {
  ShgSpectrum waveguide1;
  ShgSpectrum waveguide2;
  double overlap = 0.0;
  std::vector<std::filesystem::path> files;
};

ShgReport run_shg(const ExperimentConfig& cfg, const RunOptions& opt = {});

// --- validate --------------------------------------------------------------

struct Check {
  std::string name;
  bool ok = false;
  std::string detail;
};

std::vector<Check> run_validate(const ExperimentConfig& cfg);
std::string format_checks(const std::vector<Check>& checks);

}  // namespace epsim
