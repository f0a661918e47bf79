#include "epsim/source.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/KroneckerProduct>

#include "epsim/error.hpp"

namespace epsim {

namespace {

constexpr Complex kI{0.0, 1.0};

OccupationPattern two_photons_on(const ModeSet& modes, int path, Polarization pol) {
  OccupationPattern p{std::vector<int>(modes.size(), 0)};
  p.counts[modes.index_of({path, pol})] = 2;
  return p;
}

// sin(x)/x with the removable singularity filled in.
double sinc(double x) { return std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x; }

ComponentSpec heater(double phase_power_mw, const PhaseShifterCalibration& cal, double reference) {
  const double pair_phase = power_to_phase(phase_power_mw, cal) + reference;
  ComponentSpec c = ComponentSpec::phase(0.5 * pair_phase, {1});
  c.note = "heater " + std::to_string(phase_power_mw) + " mW";
  return c;
}

}  // namespace

void SpdcParams::validate() const {
  if (!(std::abs(pair_amplitude) > 0.0 && std::abs(pair_amplitude) < kMaxLowGainAmplitude)) {
    throw InvalidArgument("pair amplitude must be non-zero and below the low-gain bound");
  }
  if (!std::isfinite(relative_phase_rad)) throw InvalidArgument("relative phase must be finite");
  if (!(coherence >= 0.0 && coherence <= 1.0)) throw InvalidArgument("coherence must lie in [0,1]");
}

FockVector spdc_two_waveguide_state(const SpdcParams& params, double phi) {
  params.validate();
  if (!std::isfinite(phi)) throw InvalidArgument("phase must be finite");
  const ModeSet modes = ModeSet::dual_polarization(2);
  const double s = 1.0 / std::sqrt(2.0);
  return FockVector(modes, {{two_photons_on(modes, 0, params.generated_polarization), Complex{s, 0.0}},
                            {two_photons_on(modes, 1, params.generated_polarization),
                             s * std::exp(kI * (params.relative_phase_rad + phi))}});
}

const char* to_string(Device d) { return d == Device::A ? "a" : "b"; }

CircuitSpec build_device_3a_circuit(double phase_power_mw, const PhaseShifterCalibration& cal) {
  cal.validate();
  CircuitSpec spec;
  spec.components.push_back(heater(phase_power_mw, cal, kDevice3aReferencePhase));
  spec.components.push_back(ComponentSpec::coupler(0, 1, 0.5, Polarization::H));
  return spec;
}

CircuitSpec build_device_3b_circuit(double phase_power_mw, const PhaseShifterCalibration& cal) {
  cal.validate();
  CircuitSpec spec;
  spec.components.push_back(heater(phase_power_mw, cal, 0.0));
  spec.components.push_back(ComponentSpec::hwp(0, 22.5));
  spec.components.push_back(ComponentSpec::hwp(1, -22.5));
  spec.components.push_back(ComponentSpec::coupler(0, 1, 0.5));
  return spec;
}

CircuitSpec build_device_circuit(Device d, double phase_power_mw, const PhaseShifterCalibration& cal) {
  return d == Device::A ? build_device_3a_circuit(phase_power_mw, cal) : build_device_3b_circuit(phase_power_mw, cal);
}

std::vector<Branch> device_output_ensemble(Device d, double phase_power_mw, const PhaseShifterCalibration& cal,
                                           const SpdcParams& spdc, const DeviceImperfections& imp) {
  spdc.validate();
  if (!(imp.hwp_efficiency >= 0.0 && imp.hwp_efficiency <= 1.0)) {
    throw InvalidArgument("HWP efficiency must lie in [0,1]");
  }
  const CircuitSpec base = build_device_circuit(d, phase_power_mw, cal);

  // Source mixture: coherent pair superposition plus which-waveguide emission.
  const FockVector coherent = spdc_two_waveguide_state(spdc, 0.0);
  std::vector<std::pair<double, FockVector>> inputs;
  inputs.emplace_back(spdc.coherence, coherent);
  if (spdc.coherence < 1.0) {
    for (int path : {0, 1}) {
      inputs.emplace_back(0.5 * (1.0 - spdc.coherence),
                          make_fock_state(coherent.modes(), two_photons_on(coherent.modes(), path,
                                                                           spdc.generated_polarization)));
    }
  }

  // Each integrated HWP either converts (efficiency) or leaves the input unrotated.
  std::vector<std::size_t> hwp_slots;
  for (std::size_t i = 0; i < base.components.size(); ++i) {
    if (base.components[i].kind == ComponentKind::Hwp) hwp_slots.push_back(i);
  }
  const double eta = imp.hwp_efficiency;

  std::vector<Branch> out;
  const std::size_t combos = std::size_t{1} << hwp_slots.size();
  for (std::size_t mask = 0; mask < combos; ++mask) {
    double w_optics = 1.0;
    CircuitSpec spec{base.modes, {}};
    for (std::size_t i = 0; i < base.components.size(); ++i) {
      auto slot = std::find(hwp_slots.begin(), hwp_slots.end(), i);
      if (slot != hwp_slots.end()) {
        const bool rotates = ((mask >> (slot - hwp_slots.begin())) & 1U) == 0;
        w_optics *= rotates ? eta : 1.0 - eta;
        if (!rotates) continue;
      }
      spec.components.push_back(base.components[i]);
    }
    if (w_optics == 0.0) continue;
    spec.components.insert(spec.components.end(), imp.extra.begin(), imp.extra.end());
    const ModeUnitary u = compile_circuit(spec);
    for (const auto& [w_src, input] : inputs) {
      if (w_src == 0.0) continue;
      out.push_back({w_optics * w_src, apply_unitary(input, u)});
    }
  }
  return out;
}

double ensemble_probability(const std::vector<Branch>& ensemble, const PatternPredicate& keep) {
  double p = 0.0;
  for (const auto& b : ensemble) {
    double pb = 0.0;
    for (const auto& [pattern, amp] : b.state.terms()) {
      if (keep(pattern)) pb += std::norm(amp);
    }
    p += b.weight * pb;
  }
  return p;
}

double path_pattern_probability(const std::vector<Branch>& ensemble, int photons_path0, int photons_path1) {
  if (ensemble.empty()) return 0.0;
  const ModeSet& modes = ensemble.front().state.modes();
  return ensemble_probability(ensemble, [&](const OccupationPattern& p) {
    return photons_on_path(modes, p, 0) == photons_path0 && photons_on_path(modes, p, 1) == photons_path1 &&
           p.total() == photons_path0 + photons_path1;
  });
}

PolarizationState ensemble_polarization_state(const std::vector<Branch>& ensemble) {
  if (ensemble.empty()) throw InvalidArgument("empty ensemble");
  Eigen::Matrix4cd acc = Eigen::Matrix4cd::Zero();
  double total = 0.0;
  for (const auto& b : ensemble) {
    const auto keep = one_photon_per_path(b.state.modes(), {0, 1});
    const PostSelection ps = post_select(b.state, keep);
    if (ps.empty()) continue;
    const Eigen::Vector4cd psi = polarization_qubit_vector(*ps.state);
    acc += b.weight * ps.probability * psi * psi.adjoint();
    total += b.weight * ps.probability;
  }
  if (total <= 0.0) throw InvalidArgument("post-selection removes every term");
  return {DensityMatrix4(acc / total), total};
}

Eigen::Matrix4cd compensation_rotation() {
  const Eigen::Matrix2cd h = waveplate_jones(WaveplateKind::Half, 22.5);
  return Eigen::kroneckerProduct(h, h);
}

// --- Quasi-phase matching -------------------------------------------------

void QpmParams::validate() const {
  if (!(poling_period_um > 0.0)) throw InvalidArgument("poling period must be positive");
  if (!(length_mm > 0.0)) throw InvalidArgument("device length must be positive");
  if (!(pump_center_nm > 0.0)) throw InvalidArgument("pump center must be positive");
  if (!(effective_index_slope > 0.0)) throw InvalidArgument("index slope must be positive");
}

namespace {
// sinc^2(x) = 1/2
constexpr double kSincSqHalfPoint = 1.3915573782515103;
}  // namespace

double slope_for_fwhm(double fwhm_nm, double length_mm, double center_nm) {
  if (!(fwhm_nm > 0.0 && length_mm > 0.0 && center_nm > 0.0)) throw InvalidArgument("FWHM inputs must be positive");
  // x = pi g L (lambda - c) / c^2, FWHM = 2 x_half c^2 / (pi g L)
  return 2.0 * kSincSqHalfPoint * center_nm * center_nm / (std::numbers::pi * length_mm * 1e6 * fwhm_nm);
}

double first_zero_offset(const QpmParams& p) {
  p.validate();
  return p.pump_center_nm * p.pump_center_nm / (p.effective_index_slope * p.length_mm * 1e6);
}

std::vector<double> WavelengthGrid::points() const {
  if (!(step_nm > 0.0) || !(stop_nm > start_nm)) throw InvalidArgument("wavelength grid must have step > 0 and stop > start");
  const auto n = static_cast<std::size_t>(std::llround((stop_nm - start_nm) / step_nm)) + 1;
  std::vector<double> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = start_nm + static_cast<double>(i) * step_nm;
  return pts;
}

ShgSpectrum shg_spectrum(const QpmParams& params, const WavelengthGrid& grid) {
  params.validate();
  ShgSpectrum s;
  s.wavelengths_nm = grid.points();
  const double c = params.pump_center_nm;
  if (c < s.wavelengths_nm.front() || c > s.wavelengths_nm.back()) {
    throw InvalidArgument("wavelength grid excludes the phase-matching peak");
  }
  const double scale = std::numbers::pi * params.effective_index_slope * params.length_mm * 1e6 / (c * c);
  s.intensity.reserve(s.wavelengths_nm.size());
  for (double lambda : s.wavelengths_nm) {
    const double v = sinc(scale * (lambda - c));
    s.intensity.push_back(v * v);
  }
  const auto peak = std::max_element(s.intensity.begin(), s.intensity.end());
  const double max_i = *peak;
  for (double& v : s.intensity) v /= max_i;
  s.peak_wavelength_nm = s.wavelengths_nm[static_cast<std::size_t>(peak - s.intensity.begin())];
  return s;
}

namespace {

double interpolate(const ShgSpectrum& s, double x) {
  const auto& w = s.wavelengths_nm;
  if (x < w.front() || x > w.back()) return 0.0;
  auto hi = std::lower_bound(w.begin(), w.end(), x);
  if (hi == w.begin()) return s.intensity.front();
  const auto i = static_cast<std::size_t>(hi - w.begin());
  const double t = (x - w[i - 1]) / (w[i] - w[i - 1]);
  return (1.0 - t) * s.intensity[i - 1] + t * s.intensity[i];
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return acc;
}

bool same_grid(const ShgSpectrum& a, const ShgSpectrum& b) {
  if (a.wavelengths_nm.size() != b.wavelengths_nm.size()) return false;
  for (std::size_t i = 0; i < a.wavelengths_nm.size(); ++i) {
    if (std::abs(a.wavelengths_nm[i] - b.wavelengths_nm[i]) > 1e-9) return false;
  }
  return true;
}

}  // namespace

double spectral_overlap(const ShgSpectrum& a, const ShgSpectrum& b) {
  for (const auto* s : {&a, &b}) {
    if (s->wavelengths_nm.size() < 2 || s->wavelengths_nm.size() != s->intensity.size()) {
      throw InvalidArgument("spectrum needs at least two samples");
    }
  }
  std::vector<double> grid;
  std::vector<double> ia;
  std::vector<double> ib;
  if (same_grid(a, b)) {
    grid = a.wavelengths_nm;
    ia = a.intensity;
    ib = b.intensity;
  } else {
    const double lo = std::max(a.wavelengths_nm.front(), b.wavelengths_nm.front());
    const double hi = std::min(a.wavelengths_nm.back(), b.wavelengths_nm.back());
    if (!(hi > lo)) throw InvalidArgument("spectra have disjoint wavelength grids");
    const double step = std::min(a.wavelengths_nm[1] - a.wavelengths_nm[0], b.wavelengths_nm[1] - b.wavelengths_nm[0]);
    const double start = std::min(a.wavelengths_nm.front(), b.wavelengths_nm.front());
    const double stop = std::max(a.wavelengths_nm.back(), b.wavelengths_nm.back());
    grid = WavelengthGrid{start, stop, step}.points();
    for (double x : grid) {
      ia.push_back(interpolate(a, x));
      ib.push_back(interpolate(b, x));
    }
  }
  std::vector<double> geo(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) geo[i] = std::sqrt(std::max(ia[i], 0.0) * std::max(ib[i], 0.0));
  const double na = trapezoid(grid, ia);
  const double nb = trapezoid(grid, ib);
  if (!(na > 0.0 && nb > 0.0)) throw InvalidArgument("spectrum with zero integral");
  return std::clamp(trapezoid(grid, geo) / std::sqrt(na * nb), 0.0, 1.0);
}

}  // namespace epsim
