#pragma once

// Physics extraction from count data: fringe fits and visibilities,
// Pauli-correlation witness, maximum-likelihood tomography and two-qubit
// entanglement metrics, Poisson bootstrap errors.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "epsim/density_matrix.hpp"
#include "epsim/detection.hpp"
#include "epsim/polarization.hpp"

namespace epsim {

// --- Fringes -----------------------------------------------------------------

struct FringePoint {
  double power_mw = 0.0;
  CountRecord record;
};

struct FringeDataset {
  std::string label;
  std::vector<FringePoint> points;

  static constexpr std::size_t kMinPoints = 6;
  void validate() const;  // throws InvalidArgument
};

struct FitOptions {
  double period_seed_mw = 400.0;     // from the heater calibration
  double period_search_fraction = 0.25;
  int grid_points = 81;
  int max_iterations = 200;
};

// C(P) = offset + amplitude * cos(2 pi P / period + phase0)
struct SinusoidFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double period = 0.0;
  double phase0 = 0.0;
  double offset_error = 0.0;
  double amplitude_error = 0.0;
  double period_error = 0.0;
  double phase0_error = 0.0;
  double chi2 = 0.0;
  int iterations = 0;
  double visibility = 0.0;  // amplitude / offset == (max - min) / (max + min)
  double visibility_error = 0.0;
  bool converged = false;
  bool degenerate = false;          // amplitude indistinguishable from zero
  bool visibility_clamped = false;  // raw ratio fell outside [0, 1]
};

// Weighted least squares on (x, y) with per-point standard errors.
SinusoidFit fit_sinusoid(std::span<const double> x, std::span<const double> y, std::span<const double> sigma,
                         const FitOptions& opt = {});

struct FringeFit {
  std::string label;
  SinusoidFit raw;  // fit to recorded coincidences
  SinusoidFit net;  // fit after accidental subtraction

  double visibility_raw() const { return raw.visibility; }
  double visibility_net() const { return net.visibility; }
  bool flagged() const;
};

FringeFit fit_fringe(const FringeDataset& data, const FitOptions& opt = {});

// --- Correlations and witness -------------------------------------------------

struct Correlation {
  double value = 0.0;
  double error = 0.0;
};

// (N_pp - N_pm - N_mp + N_mm) / N with binomial error sqrt((1 - E^2) / N).
Correlation pauli_correlation(double n_pp, double n_pm, double n_mp, double n_mm);

struct WitnessResult {
  double s = 0.0;
  double sigma = 0.0;
  double significance = 0.0;  // (S - 1) / sigma
};

WitnessResult witness_S(const std::array<Correlation, 3>& correlations);

// --- Tomography --------------------------------------------------------------

struct TomographySetting {
  PolState first = PolState::H;
  PolState second = PolState::H;

  friend bool operator==(const TomographySetting&, const TomographySetting&) = default;
};

// All 36 products of {H, V, D, A, R, L}.
std::vector<TomographySetting> full_tomography_settings();
// Minimal 16-setting set (HH, HV, VV, VH, RH, RV, DV, DH, DR, DD, RD, HD, VD, VL, HL, RL).
std::vector<TomographySetting> minimal_tomography_settings();
bool informationally_complete(std::span<const TomographySetting> settings);

Eigen::Matrix4cd setting_projector(const TomographySetting& s);
double setting_probability(const DensityMatrix4& rho, const TomographySetting& s);

struct TomographyCount {
  TomographySetting setting;
  double counts = 0.0;
};

struct MleOptions {
  double tolerance = 1e-10;  // relative log-likelihood change
  int max_iterations = 100000;
};

struct TomographyResult {
  DensityMatrix4 rho = DensityMatrix4::maximally_mixed();
  double neg_log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Poisson maximum likelihood over rho = L L† / Tr[L L†], L lower triangular.
TomographyResult tomography_mle(std::span<const TomographyCount> counts, const MleOptions& opt = {});

// --- Metrics -----------------------------------------------------------------

double fidelity(const DensityMatrix4& rho, const DensityMatrix4& sigma);
double purity(const DensityMatrix4& rho);
double concurrence(const DensityMatrix4& rho);
double trace_distance(const DensityMatrix4& rho, const DensityMatrix4& sigma);

struct BellMatch {
  BellState state = BellState::PhiPlus;
  double fidelity = 0.0;
};
BellMatch nearest_bell_state(const DensityMatrix4& rho);

// --- Bootstrap ---------------------------------------------------------------

using Pipeline = std::function<std::vector<double>(std::span<const double>)>;

struct BootstrapResult {
  std::vector<double> estimate;  // pipeline on the original counts
  std::vector<double> mean;
  std::vector<double> error;  // sample standard deviation over resamples
  int resamples = 0;
  int failures = 0;
  double failure_fraction() const { return resamples == 0 ? 0.0 : static_cast<double>(failures) / resamples; }
};

inline constexpr int kMinBootstrapResamples = 100;

// Every count is redrawn from a Poisson law with itself as mean; resample i
// uses a stream derived from (seed, i), so results do not depend on
// evaluation order.
BootstrapResult bootstrap_errors(const Pipeline& pipeline, std::span<const double> counts, int resamples,
                                 std::uint64_t seed);

}  // namespace epsim
