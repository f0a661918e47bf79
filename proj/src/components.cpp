#include "epsim/components.hpp"

#include <cmath>
#include <numbers>

#include "epsim/error.hpp"

namespace epsim {

namespace {

constexpr Complex kI{0.0, 1.0};

Eigen::MatrixXcd identity_for(const ModeSet& modes) {
  const auto m = static_cast<Eigen::Index>(modes.size());
  return Eigen::MatrixXcd::Identity(m, m);
}

void require_path(const ModeSet& modes, int path) {
  if (!modes.find({path, Polarization::H}) || !modes.find({path, Polarization::V})) {
    throw InvalidArgument("path " + std::to_string(path) + " lacks both polarization modes");
  }
}

}  // namespace

void PhaseShifterCalibration::validate() const {
  if (!(resistance_ohm > 0.0)) throw InvalidArgument("resistance must be positive");
  if (!(power_for_2pi_mw > 0.0)) throw InvalidArgument("power for 2pi must be positive");
  if (!std::isfinite(phase_offset_rad)) throw InvalidArgument("phase offset must be finite");
}

double power_to_phase(double power_mw, const PhaseShifterCalibration& cal) {
  cal.validate();
  if (!(power_mw >= 0.0)) throw InvalidArgument("dissipated power must be non-negative");
  return 2.0 * std::numbers::pi * power_mw / cal.power_for_2pi_mw + cal.phase_offset_rad;
}

double phase_to_power(double phase_rad, const PhaseShifterCalibration& cal) {
  cal.validate();
  const double two_pi = 2.0 * std::numbers::pi;
  double delta = std::fmod(phase_rad - cal.phase_offset_rad, two_pi);
  if (delta < 0.0) delta += two_pi;
  return delta / two_pi * cal.power_for_2pi_mw;
}

double current_to_power(double current_ma, const PhaseShifterCalibration& cal) {
  cal.validate();
  const double amps = current_ma * 1e-3;
  return amps * amps * cal.resistance_ohm * 1e3;
}

Eigen::Matrix2cd waveplate_jones(WaveplateKind kind, double angle_deg) {
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d rot;
  rot << c, -s, s, c;
  const Complex retard = kind == WaveplateKind::Half ? Complex{-1.0, 0.0} : kI;
  Eigen::Matrix2cd d = Eigen::Matrix2cd::Identity();
  d(1, 1) = retard;
  return rot.cast<Complex>() * d * rot.transpose().cast<Complex>();
}

ModeUnitary coupler_unitary(const ModeSet& modes, int path_a, int path_b, double reflectivity,
                            std::optional<Polarization> only) {
  if (!(reflectivity >= 0.0 && reflectivity <= 1.0)) throw InvalidArgument("coupler ratio outside [0,1]");
  if (path_a == path_b) throw InvalidArgument("coupler needs two distinct paths");
  const double r = std::sqrt(reflectivity);
  const double t = std::sqrt(1.0 - reflectivity);
  Eigen::MatrixXcd u = identity_for(modes);
  for (Polarization pol : {Polarization::H, Polarization::V}) {
    if (only && *only != pol) continue;
    const auto a = modes.find({path_a, pol});
    const auto b = modes.find({path_b, pol});
    if (!a || !b) {
      if (only) throw InvalidArgument("coupler targets an unknown mode");
      continue;
    }
    const auto ia = static_cast<Eigen::Index>(*a);
    const auto ib = static_cast<Eigen::Index>(*b);
    u(ia, ia) = t;
    u(ib, ib) = t;
    u(ib, ia) = kI * r;
    u(ia, ib) = kI * r;
  }
  if (!modes.has_path(path_a) || !modes.has_path(path_b)) throw InvalidArgument("coupler targets an unknown path");
  return ModeUnitary(modes, std::move(u));
}

ModeUnitary phase_unitary(const ModeSet& modes, double phi, const std::vector<ModeLabel>& targets) {
  if (!std::isfinite(phi)) throw InvalidArgument("phase must be finite");
  Eigen::MatrixXcd u = identity_for(modes);
  const Complex e = std::exp(kI * phi);
  for (const auto& label : targets) {
    const auto i = static_cast<Eigen::Index>(modes.index_of(label));
    u(i, i) = e;
  }
  return ModeUnitary(modes, std::move(u));
}

ModeUnitary jones_unitary(const ModeSet& modes, const Eigen::Matrix2cd& jones, int path) {
  require_path(modes, path);
  Eigen::MatrixXcd u = identity_for(modes);
  const Eigen::Index idx[2] = {static_cast<Eigen::Index>(modes.index_of({path, Polarization::H})),
                               static_cast<Eigen::Index>(modes.index_of({path, Polarization::V}))};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) u(idx[r], idx[c]) = jones(r, c);
  }
  return ModeUnitary(modes, std::move(u));
}

ModeUnitary waveplate_unitary(const ModeSet& modes, WaveplateKind kind, double angle_deg, int path) {
  if (!std::isfinite(angle_deg)) throw InvalidArgument("waveplate angle must be finite");
  return jones_unitary(modes, waveplate_jones(kind, angle_deg), path);
}

ModeUnitary analyzer_unitary(const ModeSet& modes, PolState analyzed, int path) {
  Eigen::Matrix2cd m;
  m.row(0) = jones(analyzed).adjoint();
  m.row(1) = jones(orthogonal(analyzed)).adjoint();
  return jones_unitary(modes, m, path);
}

ModeUnitary pbs_unitary(const ModeSet& modes, int path_a, int path_b) {
  if (modes.path_count() != 2 || modes.size() != 4) throw InvalidArgument("PBS acts on exactly two paths (four modes)");
  if (path_a == path_b) throw InvalidArgument("PBS needs two distinct paths");
  require_path(modes, path_a);
  require_path(modes, path_b);
  Eigen::MatrixXcd u = identity_for(modes);
  const auto va = static_cast<Eigen::Index>(modes.index_of({path_a, Polarization::V}));
  const auto vb = static_cast<Eigen::Index>(modes.index_of({path_b, Polarization::V}));
  u(va, va) = 0.0;
  u(vb, vb) = 0.0;
  u(vb, va) = kI;
  u(va, vb) = kI;
  return ModeUnitary(modes, std::move(u));
}

std::string to_string(ComponentKind k) {
  switch (k) {
    case ComponentKind::Coupler: return "coupler";
    case ComponentKind::PhaseShifter: return "phase_shifter";
    case ComponentKind::Hwp: return "hwp";
    case ComponentKind::Qwp: return "qwp";
    case ComponentKind::Pbs: return "pbs";
    case ComponentKind::Attenuator: return "attenuator";
  }
  return "?";
}

ComponentKind component_kind_from_string(const std::string& s) {
  for (auto k : {ComponentKind::Coupler, ComponentKind::PhaseShifter, ComponentKind::Hwp, ComponentKind::Qwp,
                 ComponentKind::Pbs, ComponentKind::Attenuator}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown component kind '" + s + "'");
}

ComponentSpec ComponentSpec::coupler(int a, int b, double ratio, std::optional<Polarization> only) {
  ComponentSpec c;
  c.kind = ComponentKind::Coupler;
  c.paths = {a, b};
  c.ratio = ratio;
  c.polarization = only;
  return c;
}

ComponentSpec ComponentSpec::phase(double phi, std::vector<int> paths) {
  ComponentSpec c;
  c.kind = ComponentKind::PhaseShifter;
  c.paths = std::move(paths);
  c.phase_rad = phi;
  return c;
}

ComponentSpec ComponentSpec::hwp(int path, double angle_deg) {
  ComponentSpec c;
  c.kind = ComponentKind::Hwp;
  c.paths = {path};
  c.angle_deg = angle_deg;
  return c;
}

ComponentSpec ComponentSpec::qwp(int path, double angle_deg) {
  ComponentSpec c = hwp(path, angle_deg);
  c.kind = ComponentKind::Qwp;
  return c;
}

ComponentSpec ComponentSpec::pbs(int a, int b) {
  ComponentSpec c;
  c.kind = ComponentKind::Pbs;
  c.paths = {a, b};
  return c;
}

ComponentSpec ComponentSpec::attenuator(int path, double transmission) {
  ComponentSpec c;
  c.kind = ComponentKind::Attenuator;
  c.paths = {path};
  c.transmission = transmission;
  return c;
}

ModeUnitary compile_component(const ModeSet& modes, const ComponentSpec& c) {
  auto need_paths = [&](std::size_t n) {
    if (c.paths.size() != n) {
      throw InvalidArgument(to_string(c.kind) + " needs " + std::to_string(n) + " path(s)");
    }
    for (int p : c.paths) {
      if (!modes.has_path(p)) throw InvalidArgument("unknown path " + std::to_string(p));
    }
  };
  switch (c.kind) {
    case ComponentKind::Coupler:
      need_paths(2);
      return coupler_unitary(modes, c.paths[0], c.paths[1], c.ratio, c.polarization);
    case ComponentKind::PhaseShifter: {
      if (c.paths.empty()) throw InvalidArgument("phase shifter needs at least one path");
      std::vector<ModeLabel> targets;
      for (int p : c.paths) {
        for (Polarization pol : {Polarization::H, Polarization::V}) {
          if (c.polarization && *c.polarization != pol) continue;
          const ModeLabel label{p, pol};
          if (c.polarization || modes.find(label)) targets.push_back(label);
        }
        if (!modes.has_path(p)) throw InvalidArgument("unknown path " + std::to_string(p));
      }
      return phase_unitary(modes, c.phase_rad, targets);
    }
    case ComponentKind::Hwp:
      need_paths(1);
      return waveplate_unitary(modes, WaveplateKind::Half, c.angle_deg, c.paths[0]);
    case ComponentKind::Qwp:
      need_paths(1);
      return waveplate_unitary(modes, WaveplateKind::Quarter, c.angle_deg, c.paths[0]);
    case ComponentKind::Pbs:
      need_paths(2);
      return pbs_unitary(modes, c.paths[0], c.paths[1]);
    case ComponentKind::Attenuator:
      need_paths(1);
      if (!(c.transmission >= 0.0 && c.transmission <= 1.0)) throw InvalidArgument("transmission outside [0,1]");
      return ModeUnitary::identity(modes);
  }
  throw InvalidArgument("unknown component kind");
}

ModeUnitary compile_circuit(const CircuitSpec& spec) {
  ModeUnitary total = ModeUnitary::identity(spec.modes);
  for (std::size_t i = 0; i < spec.components.size(); ++i) {
    try {
      total = compile_component(spec.modes, spec.components[i]).after(total);
    } catch (const Error& e) {
      throw ComponentError(i, e.what());
    }
  }
  return total;
}

std::vector<double> path_transmissions(const CircuitSpec& spec) {
  std::vector<double> t(static_cast<std::size_t>(std::max(spec.modes.path_count(), 0)), 1.0);
  for (const auto& c : spec.components) {
    if (c.kind != ComponentKind::Attenuator || c.paths.size() != 1) continue;
    const int p = c.paths[0];
    if (p >= 0 && static_cast<std::size_t>(p) < t.size()) t[static_cast<std::size_t>(p)] *= c.transmission;
  }
  return t;
}

}  // namespace epsim
