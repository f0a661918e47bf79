#include "epsim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace epsim {

using Json = nlohmann::ordered_json;

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error([&] {
        std::string msg = "invalid configuration";
        for (const auto& i : issues) msg += "\n  " + i.path + ": " + i.message;
        return msg;
      }()),
      issues_(std::move(issues)) {}

namespace {

class Reader {
 public:
  explicit Reader(std::vector<ConfigIssue>& issues) : issues_(issues) {}

  void issue(const std::string& path, const std::string& msg) { issues_.push_back({path, msg}); }

  // Object at `key`, or nullptr (with an issue if present but not an object).
  const Json* section(const Json& parent, const std::string& key, const std::string& path, bool required = false) {
    auto it = parent.find(key);
    if (it == parent.end()) {
      if (required) issue(path, "missing section");
      return nullptr;
    }
    if (!it->is_object()) {
      issue(path, "expected an object");
      return nullptr;
    }
    return &*it;
  }

  void known_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) issue(join(path, it.key()), "unknown field");
    }
  }

  double number(const Json& obj, const std::string& key, const std::string& path, double fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) {
      issue(join(path, key), "expected a number");
      return fallback;
    }
    return it->get<double>();
  }

  long long integer(const Json& obj, const std::string& key, const std::string& path, long long fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer()) {
      issue(join(path, key), "expected an integer");
      return fallback;
    }
    return it->get<long long>();
  }

  std::string string(const Json& obj, const std::string& key, const std::string& path, const std::string& fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_string()) {
      issue(join(path, key), "expected a string");
      return fallback;
    }
    return it->get<std::string>();
  }

  bool boolean(const Json& obj, const std::string& key, const std::string& path, bool fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_boolean()) {
      issue(join(path, key), "expected true or false");
      return fallback;
    }
    return it->get<bool>();
  }

  void check(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) issue(path, msg);
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::vector<ConfigIssue>& issues_;
};

void read_calibration(Reader& r, const Json& j, const std::string& path, PhaseShifterCalibration& cal) {
  r.known_keys(j, path, {"resistance_ohm", "power_for_2pi_mW", "phase_offset_rad"});
  cal.resistance_ohm = r.number(j, "resistance_ohm", path, cal.resistance_ohm);
  cal.power_for_2pi_mw = r.number(j, "power_for_2pi_mW", path, cal.power_for_2pi_mw);
  cal.phase_offset_rad = r.number(j, "phase_offset_rad", path, cal.phase_offset_rad);
  r.check(cal.resistance_ohm > 0.0, path + ".resistance_ohm", "must be > 0");
  r.check(cal.power_for_2pi_mw > 0.0, path + ".power_for_2pi_mW", "must be > 0");
  r.check(std::isfinite(cal.phase_offset_rad), path + ".phase_offset_rad", "must be finite");
}

void read_spdc(Reader& r, const Json& j, const std::string& path, SpdcParams& p) {
  r.known_keys(j, path, {"pair_amplitude", "generated_polarization", "relative_phase_rad", "coherence"});
  p.pair_amplitude = r.number(j, "pair_amplitude", path, p.pair_amplitude);
  const std::string pol = r.string(j, "generated_polarization", path, "H");
  if (pol == "H" || pol == "V") {
    p.generated_polarization = polarization_from_string(pol);
  } else {
    r.issue(path + ".generated_polarization", "must be H or V");
  }
  p.relative_phase_rad = r.number(j, "relative_phase_rad", path, p.relative_phase_rad);
  p.coherence = r.number(j, "coherence", path, p.coherence);
  r.check(std::abs(p.pair_amplitude) > 0.0 && std::abs(p.pair_amplitude) < kMaxLowGainAmplitude,
          path + ".pair_amplitude", "must be non-zero and below 0.1 (low-gain regime)");
  r.check(p.coherence >= 0.0 && p.coherence <= 1.0, path + ".coherence", "must lie in [0, 1]");
}

void read_qpm(Reader& r, const Json& j, const std::string& path, QpmParams& q) {
  r.known_keys(j, path, {"poling_period_um", "length_mm", "pump_center_nm", "effective_index_slope", "fwhm_nm"});
  q.poling_period_um = r.number(j, "poling_period_um", path, q.poling_period_um);
  q.length_mm = r.number(j, "length_mm", path, q.length_mm);
  q.pump_center_nm = r.number(j, "pump_center_nm", path, q.pump_center_nm);
  q.effective_index_slope = r.number(j, "effective_index_slope", path, q.effective_index_slope);
  r.check(q.poling_period_um > 0.0, path + ".poling_period_um", "must be > 0");
  r.check(q.length_mm > 0.0, path + ".length_mm", "must be > 0");
  r.check(q.pump_center_nm > 0.0, path + ".pump_center_nm", "must be > 0");
  if (j.contains("fwhm_nm")) {
    if (j.contains("effective_index_slope")) r.issue(path + ".fwhm_nm", "give either fwhm_nm or effective_index_slope");
    const double fwhm = r.number(j, "fwhm_nm", path, 0.0);
    if (fwhm > 0.0 && q.length_mm > 0.0 && q.pump_center_nm > 0.0) {
      q.effective_index_slope = slope_for_fwhm(fwhm, q.length_mm, q.pump_center_nm);
    } else {
      r.issue(path + ".fwhm_nm", "must be > 0");
    }
  }
  r.check(q.effective_index_slope > 0.0, path + ".effective_index_slope", "must be > 0");
}

ComponentSpec read_component(Reader& r, const Json& j, const std::string& path, const PhaseShifterCalibration& cal) {
  ComponentSpec c;
  r.known_keys(j, path, {"kind", "path", "paths", "ratio", "polarization", "phase_rad", "power_mW", "pump",
                         "angle_deg", "transmission"});
  const std::string kind = r.string(j, "kind", path, "");
  try {
    c.kind = component_kind_from_string(kind);
  } catch (const InvalidArgument&) {
    r.issue(path + ".kind", "unknown component kind '" + kind + "'");
    return c;
  }
  if (j.contains("path")) {
    c.paths = {static_cast<int>(r.integer(j, "path", path, 0))};
  } else if (j.contains("paths")) {
    const Json& p = j["paths"];
    if (!p.is_array()) {
      r.issue(path + ".paths", "expected an array of path indices");
    } else {
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i].is_number_integer()) {
          c.paths.push_back(p[i].get<int>());
        } else {
          r.issue(path + ".paths[" + std::to_string(i) + "]", "expected an integer");
        }
      }
    }
  }
  for (std::size_t i = 0; i < c.paths.size(); ++i) {
    r.check(c.paths[i] == 0 || c.paths[i] == 1, path + ".paths[" + std::to_string(i) + "]", "path must be 0 or 1");
  }
  const std::string pol = r.string(j, "polarization", path, "both");
  if (pol == "H" || pol == "V") {
    c.polarization = polarization_from_string(pol);
  } else if (pol != "both") {
    r.issue(path + ".polarization", "must be H, V or both");
  }

  switch (c.kind) {
    case ComponentKind::Coupler:
      c.ratio = r.number(j, "ratio", path, 0.5);
      r.check(c.ratio >= 0.0 && c.ratio <= 1.0, path + ".ratio", "splitting ratio must lie in [0, 1]");
      r.check(c.paths.size() == 2 && c.paths[0] != c.paths[1], path + ".paths", "coupler needs two distinct paths");
      break;
    case ComponentKind::PhaseShifter: {
      r.check(!c.paths.empty(), path + ".paths", "phase shifter needs at least one path");
      if (j.contains("power_mW")) {
        const double p = r.number(j, "power_mW", path, 0.0);
        if (p >= 0.0 && cal.power_for_2pi_mw > 0.0) {
          const double phi = power_to_phase(p, cal);
          c.phase_rad = r.boolean(j, "pump", path, false) ? 0.5 * phi : phi;
          c.note = "heater " + std::to_string(p) + " mW";
        } else {
          r.issue(path + ".power_mW", "dissipated power must be >= 0");
        }
      } else {
        c.phase_rad = r.number(j, "phase_rad", path, 0.0);
        r.check(std::isfinite(c.phase_rad), path + ".phase_rad", "must be finite");
      }
      break;
    }
    case ComponentKind::Hwp:
    case ComponentKind::Qwp:
      c.angle_deg = r.number(j, "angle_deg", path, 0.0);
      r.check(c.paths.size() == 1, path + ".path", "waveplate acts on one path");
      break;
    case ComponentKind::Pbs:
      r.check(c.paths.size() == 2 && c.paths[0] != c.paths[1], path + ".paths", "PBS needs two distinct paths");
      break;
    case ComponentKind::Attenuator:
      c.transmission = r.number(j, "transmission", path, 1.0);
      r.check(c.transmission >= 0.0 && c.transmission <= 1.0, path + ".transmission", "must lie in [0, 1]");
      r.check(c.paths.size() == 1, path + ".path", "attenuator acts on one path");
      break;
  }
  return c;
}

void read_detector(Reader& r, const Json& j, const std::string& path, int number, DetectorModel& d) {
  r.known_keys(j, path, {"efficiency", "dark_rate_hz", "dead_time_us", "mode", "gate_width_ns", "trigger_delay_ns"});
  const std::string name = "detector " + std::to_string(number);
  d.efficiency = r.number(j, "efficiency", path, d.efficiency);
  d.dark_rate_hz = r.number(j, "dark_rate_hz", path, d.dark_rate_hz);
  d.dead_time_us = r.number(j, "dead_time_us", path, d.dead_time_us);
  const std::string mode = r.string(j, "mode", path, "free_running");
  if (mode == "free_running") {
    d.mode = DetectorMode::FreeRunning;
  } else if (mode == "gated") {
    d.mode = DetectorMode::Gated;
  } else {
    r.issue(path + ".mode", name + ": mode must be free_running or gated");
  }
  d.gate_width_ns = r.number(j, "gate_width_ns", path, d.gate_width_ns);
  d.trigger_delay_ns = r.number(j, "trigger_delay_ns", path, d.trigger_delay_ns);
  r.check(d.efficiency >= 0.0 && d.efficiency <= 1.0, path + ".efficiency", name + ": efficiency must lie in [0, 1]");
  r.check(d.dark_rate_hz >= 0.0, path + ".dark_rate_hz", name + ": must be >= 0");
  r.check(d.dead_time_us >= 0.0, path + ".dead_time_us", name + ": must be >= 0");
  r.check(d.trigger_delay_ns >= 0.0, path + ".trigger_delay_ns", name + ": must be >= 0");
  r.check(d.mode != DetectorMode::Gated || d.gate_width_ns > 0.0, path + ".gate_width_ns",
          name + ": gated mode requires gate_width_ns > 0");
}

}  // namespace

ConfigParse parse_config_text(const std::string& text) {
  ConfigParse out;
  Reader r(out.issues);
  Json root;
  try {
    root = Json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    r.issue("<document>", e.what());
    return out;
  }
  if (!root.is_object()) {
    r.issue("<document>", "top level must be an object");
    return out;
  }
  ExperimentConfig& cfg = out.config;
  r.known_keys(root, "", {"schema_version", "circuit", "sweep", "tomography", "shg", "noise", "seed", "outputs"});

  if (!root.contains("schema_version")) {
    r.issue("schema_version", "missing (expected " + std::to_string(kSchemaVersion) + ")");
  } else {
    cfg.schema_version = static_cast<int>(r.integer(root, "schema_version", "", kSchemaVersion));
    r.check(cfg.schema_version == kSchemaVersion, "schema_version",
            "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  }

  if (const Json* c = r.section(root, "circuit", "circuit")) {
    r.known_keys(*c, "circuit", {"device3", "calibration", "spdc", "hwp_efficiency", "qpm", "components"});
    const std::string dev = r.string(*c, "device3", "circuit", "b");
    if (dev == "a") {
      cfg.circuit.device = Device::A;
    } else if (dev == "b") {
      cfg.circuit.device = Device::B;
    } else {
      r.issue("circuit.device3", "must be \"a\" or \"b\"");
    }
    if (const Json* cal = r.section(*c, "calibration", "circuit.calibration")) {
      read_calibration(r, *cal, "circuit.calibration", cfg.circuit.calibration);
    }
    if (const Json* s = r.section(*c, "spdc", "circuit.spdc")) read_spdc(r, *s, "circuit.spdc", cfg.circuit.spdc);
    cfg.circuit.hwp_efficiency = r.number(*c, "hwp_efficiency", "circuit", cfg.circuit.hwp_efficiency);
    r.check(cfg.circuit.hwp_efficiency >= 0.0 && cfg.circuit.hwp_efficiency <= 1.0, "circuit.hwp_efficiency",
            "must lie in [0, 1]");
    if (auto it = c->find("qpm"); it != c->end()) {
      if (!it->is_array() || it->size() != 2) {
        r.issue("circuit.qpm", "expected an array of two waveguide entries");
      } else {
        for (std::size_t i = 0; i < 2; ++i) {
          const std::string p = "circuit.qpm[" + std::to_string(i) + "]";
          if ((*it)[i].is_object()) {
            read_qpm(r, (*it)[i], p, cfg.circuit.qpm[i]);
          } else {
            r.issue(p, "expected an object");
          }
        }
      }
    }
    if (auto it = c->find("components"); it != c->end()) {
      if (!it->is_array()) {
        r.issue("circuit.components", "expected an array");
      } else {
        for (std::size_t i = 0; i < it->size(); ++i) {
          const std::string p = "circuit.components[" + std::to_string(i) + "]";
          if ((*it)[i].is_object()) {
            cfg.circuit.components.push_back(read_component(r, (*it)[i], p, cfg.circuit.calibration));
          } else {
            r.issue(p, "expected an object");
          }
        }
      }
    }
  }

  if (const Json* s = r.section(root, "sweep", "sweep")) {
    r.known_keys(*s, "sweep", {"power_start_mW", "power_stop_mW", "points", "duration_per_point_s"});
    auto& sw = cfg.sweep;
    sw.power_start_mw = r.number(*s, "power_start_mW", "sweep", sw.power_start_mw);
    sw.power_stop_mw = r.number(*s, "power_stop_mW", "sweep", sw.power_stop_mw);
    sw.points = static_cast<int>(r.integer(*s, "points", "sweep", sw.points));
    sw.duration_per_point_s = r.number(*s, "duration_per_point_s", "sweep", sw.duration_per_point_s);
  }
  r.check(cfg.sweep.power_start_mw >= 0.0, "sweep.power_start_mW", "must be >= 0");
  r.check(cfg.sweep.power_stop_mw > cfg.sweep.power_start_mw, "sweep.power_stop_mW", "power range is degenerate");
  r.check(cfg.sweep.points >= 2, "sweep.points", "must be >= 2");
  r.check(cfg.sweep.duration_per_point_s > 0.0, "sweep.duration_per_point_s", "must be > 0");

  if (const Json* t = r.section(root, "tomography", "tomography")) {
    r.known_keys(*t, "tomography", {"phase_power_mW", "duration_per_setting_s", "bootstrap_resamples"});
    auto& tc = cfg.tomography;
    tc.phase_power_mw = r.number(*t, "phase_power_mW", "tomography", tc.phase_power_mw);
    tc.duration_per_setting_s = r.number(*t, "duration_per_setting_s", "tomography", tc.duration_per_setting_s);
    tc.bootstrap_resamples = static_cast<int>(r.integer(*t, "bootstrap_resamples", "tomography", tc.bootstrap_resamples));
  }
  r.check(cfg.tomography.phase_power_mw >= 0.0, "tomography.phase_power_mW", "must be >= 0");
  r.check(cfg.tomography.duration_per_setting_s > 0.0, "tomography.duration_per_setting_s", "must be > 0");
  r.check(cfg.tomography.bootstrap_resamples >= kMinBootstrapResamples, "tomography.bootstrap_resamples",
          "must be >= 100");

  if (const Json* s = r.section(root, "shg", "shg")) {
    r.known_keys(*s, "shg", {"grid_start_nm", "grid_stop_nm", "grid_step_nm"});
    cfg.shg_grid.start_nm = r.number(*s, "grid_start_nm", "shg", cfg.shg_grid.start_nm);
    cfg.shg_grid.stop_nm = r.number(*s, "grid_stop_nm", "shg", cfg.shg_grid.stop_nm);
    cfg.shg_grid.step_nm = r.number(*s, "grid_step_nm", "shg", cfg.shg_grid.step_nm);
  }
  r.check(cfg.shg_grid.step_nm > 0.0, "shg.grid_step_nm", "must be > 0");
  r.check(cfg.shg_grid.stop_nm > cfg.shg_grid.start_nm, "shg.grid_stop_nm", "must exceed grid_start_nm");
  for (std::size_t i = 0; i < 2; ++i) {
    const double c = cfg.circuit.qpm[i].pump_center_nm;
    r.check(c >= cfg.shg_grid.start_nm && c <= cfg.shg_grid.stop_nm, "shg",
            "grid excludes the phase-matching peak of waveguide " + std::to_string(i + 1));
  }

  if (const Json* n = r.section(root, "noise", "noise")) {
    r.known_keys(*n, "noise", {"pair_rate_hz", "transmission_per_arm", "coincidence_window_ns", "detectors"});
    auto& np = cfg.noise.params;
    np.pair_rate_hz = r.number(*n, "pair_rate_hz", "noise", np.pair_rate_hz);
    np.transmission_per_arm = r.number(*n, "transmission_per_arm", "noise", np.transmission_per_arm);
    np.coincidence_window_ns = r.number(*n, "coincidence_window_ns", "noise", np.coincidence_window_ns);
    r.check(np.pair_rate_hz >= 0.0, "noise.pair_rate_hz", "must be >= 0");
    r.check(np.transmission_per_arm >= 0.0 && np.transmission_per_arm <= 1.0, "noise.transmission_per_arm",
            "must lie in [0, 1]");
    r.check(np.coincidence_window_ns >= 0.0, "noise.coincidence_window_ns", "must be >= 0");
    if (auto it = n->find("detectors"); it != n->end()) {
      if (!it->is_array() || it->size() != 2) {
        r.issue("noise.detectors", "expected an array of two detectors");
      } else {
        for (std::size_t i = 0; i < 2; ++i) {
          const std::string p = "noise.detectors[" + std::to_string(i) + "]";
          if ((*it)[i].is_object()) {
            read_detector(r, (*it)[i], p, static_cast<int>(i + 1), cfg.noise.detectors[i]);
          } else {
            r.issue(p, "expected an object");
          }
        }
      }
    }
  }

  if (auto it = root.find("seed"); it != root.end()) {
    if (it->is_number_unsigned()) {
      cfg.seed = it->get<std::uint64_t>();
    } else {
      r.issue("seed", "expected a non-negative integer");
    }
  }
  cfg.outputs = r.string(root, "outputs", "", cfg.outputs);
  return out;
}

ConfigParse parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    std::ios_base::failure err("cannot read configuration file " + path.string());
    throw err;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  ConfigParse p = parse_config_file(path);
  if (!p.ok()) throw ConfigError(std::move(p.issues));
  return p.config;
}

std::string to_json_text(const ExperimentConfig& cfg) {
  Json j;
  j["schema_version"] = cfg.schema_version;
  Json c;
  c["device3"] = to_string(cfg.circuit.device);
  c["calibration"] = {{"resistance_ohm", cfg.circuit.calibration.resistance_ohm},
                      {"power_for_2pi_mW", cfg.circuit.calibration.power_for_2pi_mw},
                      {"phase_offset_rad", cfg.circuit.calibration.phase_offset_rad}};
  c["spdc"] = {{"pair_amplitude", cfg.circuit.spdc.pair_amplitude},
               {"generated_polarization", std::string(to_string(cfg.circuit.spdc.generated_polarization))},
               {"relative_phase_rad", cfg.circuit.spdc.relative_phase_rad},
               {"coherence", cfg.circuit.spdc.coherence}};
  c["hwp_efficiency"] = cfg.circuit.hwp_efficiency;
  c["qpm"] = Json::array();
  for (const auto& q : cfg.circuit.qpm) {
    c["qpm"].push_back({{"poling_period_um", q.poling_period_um},
                        {"length_mm", q.length_mm},
                        {"pump_center_nm", q.pump_center_nm},
                        {"effective_index_slope", q.effective_index_slope}});
  }
  c["components"] = Json::array();
  for (const auto& comp : cfg.circuit.components) {
    Json e;
    e["kind"] = to_string(comp.kind);
    e["paths"] = comp.paths;
    if (comp.polarization) e["polarization"] = std::string(to_string(*comp.polarization));
    switch (comp.kind) {
      case ComponentKind::Coupler: e["ratio"] = comp.ratio; break;
      case ComponentKind::PhaseShifter: e["phase_rad"] = comp.phase_rad; break;
      case ComponentKind::Hwp:
      case ComponentKind::Qwp: e["angle_deg"] = comp.angle_deg; break;
      case ComponentKind::Attenuator: e["transmission"] = comp.transmission; break;
      case ComponentKind::Pbs: break;
    }
    c["components"].push_back(e);
  }
  j["circuit"] = c;
  j["sweep"] = {{"power_start_mW", cfg.sweep.power_start_mw},
                {"power_stop_mW", cfg.sweep.power_stop_mw},
                {"points", cfg.sweep.points},
                {"duration_per_point_s", cfg.sweep.duration_per_point_s}};
  j["tomography"] = {{"phase_power_mW", cfg.tomography.phase_power_mw},
                     {"duration_per_setting_s", cfg.tomography.duration_per_setting_s},
                     {"bootstrap_resamples", cfg.tomography.bootstrap_resamples}};
  j["shg"] = {{"grid_start_nm", cfg.shg_grid.start_nm},
              {"grid_stop_nm", cfg.shg_grid.stop_nm},
              {"grid_step_nm", cfg.shg_grid.step_nm}};
  Json dets = Json::array();
  for (const auto& d : cfg.noise.detectors) {
    dets.push_back({{"efficiency", d.efficiency},
                    {"dark_rate_hz", d.dark_rate_hz},
                    {"dead_time_us", d.dead_time_us},
                    {"mode", d.mode == DetectorMode::Gated ? "gated" : "free_running"},
                    {"gate_width_ns", d.gate_width_ns},
                    {"trigger_delay_ns", d.trigger_delay_ns}});
  }
  j["noise"] = {{"pair_rate_hz", cfg.noise.params.pair_rate_hz},
                {"transmission_per_arm", cfg.noise.params.transmission_per_arm},
                {"coincidence_window_ns", cfg.noise.params.coincidence_window_ns},
                {"detectors", dets}};
  j["seed"] = cfg.seed;
  j["outputs"] = cfg.outputs;
  return j.dump(2) + "\n";
}

}  // namespace epsim
