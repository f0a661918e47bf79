#pragma once

// Passive components of the source and analysis stages, compiled to
// ModeUnitary objects.
//
// Conventions
//   coupler:  [[t, i r], [i r, t]] with r^2 = reflectivity, t^2 = 1 - r^2
//   phase:    e^{i phi} on the targeted modes
//   retarder: R(theta) diag(1, e^{i delta}) R(-theta) on a path's (H, V) modes,
//             so HWP(0) = diag(1, -1) and HWP(22.5 deg) maps H to D
//   PBS:      transmits H, reflects V into the other path with a factor i

#include <optional>
#include <string>
#include <vector>

#include "epsim/fock.hpp"

namespace epsim {

struct PhaseShifterCalibration {
  double resistance_ohm = 75.0;
  double power_for_2pi_mw = 400.0;
  double phase_offset_rad = 0.0;

  void validate() const;  // throws InvalidArgument
};

// Thermo-optic response, linear in dissipated power.
double power_to_phase(double power_mw, const PhaseShifterCalibration& cal);
// Inverse of power_to_phase on the branch power >= 0 nearest to zero.
double phase_to_power(double phase_rad, const PhaseShifterCalibration& cal);
// Joule power I^2 R of a drive current.
double current_to_power(double current_ma, const PhaseShifterCalibration& cal);

enum class WaveplateKind { Half, Quarter };

Eigen::Matrix2cd waveplate_jones(WaveplateKind kind, double angle_deg);

ModeUnitary coupler_unitary(const ModeSet& modes, int path_a, int path_b, double reflectivity,
                            std::optional<Polarization> only = std::nullopt);
ModeUnitary phase_unitary(const ModeSet& modes, double phi, const std::vector<ModeLabel>& targets);
ModeUnitary waveplate_unitary(const ModeSet& modes, WaveplateKind kind, double angle_deg, int path);
ModeUnitary pbs_unitary(const ModeSet& modes, int path_a, int path_b);
// Maps polarization `analyzed` on `path` onto H (and its orthogonal onto V).
ModeUnitary analyzer_unitary(const ModeSet& modes, PolState analyzed, int path);
// Arbitrary 2x2 Jones matrix on a path's (H, V) modes.
ModeUnitary jones_unitary(const ModeSet& modes, const Eigen::Matrix2cd& jones, int path);

enum class ComponentKind { Coupler, PhaseShifter, Hwp, Qwp, Pbs, Attenuator };

std::string to_string(ComponentKind k);
ComponentKind component_kind_from_string(const std::string& s);

// One element of a circuit. Which fields matter depends on `kind`:
//   Coupler       paths {a, b}, ratio, polarization (nullopt = insensitive)
//   PhaseShifter  paths, phase_rad (per photon), polarization (nullopt = both)
//   Hwp / Qwp     paths {p}, angle_deg
//   Pbs           paths {a, b}
//   Attenuator    paths {p}, transmission (applied at detection, identity here)
struct ComponentSpec {
  ComponentKind kind = ComponentKind::Coupler;
  std::vector<int> paths;
  std::optional<Polarization> polarization;
  double ratio = 0.5;
  double phase_rad = 0.0;
  double angle_deg = 0.0;
  double transmission = 1.0;
  std::string note;  // free text, e.g. "heater 120 mW"

  static ComponentSpec coupler(int a, int b, double ratio, std::optional<Polarization> only = std::nullopt);
  static ComponentSpec phase(double phi, std::vector<int> paths);
  static ComponentSpec hwp(int path, double angle_deg);
  static ComponentSpec qwp(int path, double angle_deg);
  static ComponentSpec pbs(int a, int b);
  static ComponentSpec attenuator(int path, double transmission);
};

struct CircuitSpec {
  ModeSet modes = ModeSet::dual_polarization(2);
  std::vector<ComponentSpec> components;
};

ModeUnitary compile_component(const ModeSet& modes, const ComponentSpec& c);
// Ordered product (last component applied last). Errors carry the index.
ModeUnitary compile_circuit(const CircuitSpec& spec);
// Per-path transmission from attenuators, indexed by path.
std::vector<double> path_transmissions(const CircuitSpec& spec);

}  // namespace epsim
