#pragma once

// Two-waveguide SPDC source, the interchangeable third device, and the
// quasi-phase-matching (SHG) model of the nonlinear waveguides.
//
// Phase convention (see docs/conventions.md): the heater sits on the pump
// arm feeding waveguide 1 (path 1). A pump phase phi is inherited once by the
// daughter pair, i.e. phi/2 per down-converted photon, so the circuit carries
// a per-photon phase of phi/2 on path 1.

#include <vector>

#include "epsim/components.hpp"
#include "epsim/fock.hpp"

namespace epsim {

struct SpdcParams {
  double pair_amplitude = 0.01;  // per-waveguide emission amplitude, low gain
  Polarization generated_polarization = Polarization::H;
  double relative_phase_rad = 0.0;
  // Fraction of pairs emitted as a coherent two-waveguide superposition; the
  // rest carry which-waveguide information (incoherent mixture).
  double coherence = 1.0;

  void validate() const;
};

inline constexpr double kMaxLowGainAmplitude = 0.1;

// (|2,0> + e^{i(relative_phase + phi)} |0,2>)/sqrt(2) in the single-pair
// sector, both photons in the generated polarization.
FockVector spdc_two_waveguide_state(const SpdcParams& params, double phi);

enum class Device { A, B };

const char* to_string(Device d);

// Fixed path-length offset of device 3a, chosen so that phi = 0 is the NOON
// point and phi = pi the |1,1> point.
inline constexpr double kDevice3aReferencePhase = 3.14159265358979323846;

// [heater, 50:50 coupler on H].
CircuitSpec build_device_3a_circuit(double phase_power_mw, const PhaseShifterCalibration& cal);
// [heater, HWP(22.5) path 0, HWP(-22.5) path 1, polarization-insensitive 50:50 coupler].
CircuitSpec build_device_3b_circuit(double phase_power_mw, const PhaseShifterCalibration& cal);
CircuitSpec build_device_circuit(Device d, double phase_power_mw, const PhaseShifterCalibration& cal);

// Mixture of pure output states; weights sum to 1.
struct Branch {
  double weight = 0.0;
  FockVector state;
};

struct DeviceImperfections {
  double hwp_efficiency = 1.0;  // probability an integrated HWP rotates the polarization
  std::vector<ComponentSpec> extra;  // appended after the device (analysis-side optics)
};

std::vector<Branch> device_output_ensemble(Device d, double phase_power_mw, const PhaseShifterCalibration& cal,
                                           const SpdcParams& spdc, const DeviceImperfections& imp = {});

double ensemble_probability(const std::vector<Branch>& ensemble, const PatternPredicate& keep);

// Probability of a path-resolved photon-number outcome (summed over polarizations).
double path_pattern_probability(const std::vector<Branch>& ensemble, int photons_path0, int photons_path1);

struct PolarizationState {
  DensityMatrix4 rho;
  double probability = 0.0;  // one-photon-per-path success probability
};

// Post-selected two-qubit polarization state of the mixture.
PolarizationState ensemble_polarization_state(const std::vector<Branch>& ensemble);

// Local rotation applied before analysis: HWP(22.5 deg) on each path, which
// maps the diagonal basis onto H/V.
Eigen::Matrix4cd compensation_rotation();

// --- Quasi-phase matching -------------------------------------------------

struct QpmParams {
  double poling_period_um = 19.5;
  double length_mm = 18.0;
  double pump_center_nm = 780.31;
  double effective_index_slope = 0.12;  // group-index mismatch

  void validate() const;
};

// Slope giving the requested sinc^2 FWHM.
double slope_for_fwhm(double fwhm_nm, double length_mm, double center_nm);
// Half-distance between the first zeros around the peak.
double first_zero_offset(const QpmParams& p);

struct WavelengthGrid {
  double start_nm = 779.31;
  double stop_nm = 781.31;
  double step_nm = 0.001;

  std::vector<double> points() const;
};

struct ShgSpectrum {
  std::vector<double> wavelengths_nm;
  std::vector<double> intensity;
  double peak_wavelength_nm = 0.0;
};

ShgSpectrum shg_spectrum(const QpmParams& params, const WavelengthGrid& grid);
// ∫sqrt(Ia Ib) / sqrt(∫Ia ∫Ib), resampling onto a common grid if needed.
double spectral_overlap(const ShgSpectrum& a, const ShgSpectrum& b);

}  // namespace epsim
