#include "epsim/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "epsim/error.hpp"
#include "epsim/measurement.hpp"
#include "epsim/random.hpp"

namespace epsim {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string g17(double v) { return fmt("%.17g", v); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw std::ios_base::failure("write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::ios_base::failure("cannot create directory " + dir.string() + ": " + ec.message());
}

std::vector<double> transmissions(const ExperimentConfig& cfg) {
  return path_transmissions(CircuitSpec{ModeSet::dual_polarization(2), cfg.circuit.components});
}

std::vector<Branch> ensemble_at(const ExperimentConfig& cfg, double power_mw) {
  DeviceImperfections imp;
  imp.hwp_efficiency = cfg.circuit.hwp_efficiency;
  imp.extra = cfg.circuit.components;
  return device_output_ensemble(cfg.circuit.device, power_mw, cfg.circuit.calibration, cfg.circuit.spdc, imp);
}

PolState pol_from_char(char c) {
  if (c == '+') return PolState::D;
  if (c == '-') return PolState::A;
  return pol_state_from_string(std::string_view(&c, 1));
}

CountRecord record_for(const ExperimentConfig& cfg, const OutcomeProbabilities& p, double duration_s, bool ideal,
                       std::uint64_t seed) {
  const auto& d = cfg.noise.detectors;
  return ideal ? expected_record(p, cfg.noise.params, d[0], d[1], duration_s)
               : simulate_counts(p, cfg.noise.params, d[0], d[1], duration_s, seed);
}

std::string file_tag(const std::string& label) {
  std::string tag;
  for (char c : label) tag += c == '+' ? 'p' : c == '-' ? 'm' : c;
  return tag;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw InvalidArgument("");
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("malformed " + what + " '" + s + "'");
  }
}

double wrap_2pi(double x) {
  const double two_pi = 2.0 * std::numbers::pi;
  x = std::fmod(x, two_pi);
  return x < 0.0 ? x + two_pi : x;
}

}  // namespace

ExperimentConfig ideal_config(ExperimentConfig cfg) {
  cfg.circuit.spdc.coherence = 1.0;
  cfg.circuit.hwp_efficiency = 1.0;
  cfg.noise.params.coincidence_window_ns = 0.0;
  for (auto& d : cfg.noise.detectors) d.dark_rate_hz = 0.0;
  return cfg;
}

OutcomeProbabilities outcome_probabilities(const ExperimentConfig& cfg, double phase_power_mw,
                                           const std::string& label) {
  const auto ensemble = ensemble_at(cfg, phase_power_mw);
  const auto t = transmissions(cfg);
  if (cfg.circuit.device == Device::A) return path_outcome(ensemble, label, t);
  if (label.size() != 2) throw InvalidArgument("polarization outcome must name two states, got '" + label + "'");
  return polarization_outcome(ensemble, {pol_from_char(label[0]), pol_from_char(label[1])}, t);
}

// --- sweep ---------------------------------------------------------------

std::vector<std::string> sweep_labels(Device d) {
  if (d == Device::A) return {"11", "02"};
  return {"++", "+-", "HH"};
}

std::string fringe_csv_header() { return "label,power_mW,counts,error,net_counts,net_error," + count_record_csv_header(); }

void write_fringe_csv(const std::filesystem::path& path, const FringeDataset& data) {
  std::string text = fringe_csv_header() + "\n";
  for (const auto& pt : data.points) {
    const NetCounts net = subtract_accidentals(pt.record);
    text += data.label + "," + g17(pt.power_mw) + "," + g17(pt.record.coincidences) + "," +
            g17(std::sqrt(pt.record.coincidences)) + "," + g17(net.net) + "," + g17(net.error) + "," +
            to_csv_row(pt.record) + "\n";
  }
  write_text(path, text);
}

FringeDataset read_fringe_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != fringe_csv_header()) {
    throw InvalidArgument(path.string() + ": unexpected fringe CSV header");
  }
  FringeDataset data;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() < 7) throw InvalidArgument(path.string() + ": row " + std::to_string(row) + " is too short");
    if (data.points.empty()) {
      data.label = cells[0];
    } else if (cells[0] != data.label) {
      throw InvalidArgument(path.string() + ": mixed labels in one fringe file");
    }
    FringePoint pt;
    pt.power_mw = parse_double(cells[1], "power");
    std::string rest;
    for (std::size_t i = 6; i < cells.size(); ++i) rest += (i > 6 ? "," : "") + cells[i];
    pt.record = count_record_from_csv(rest);
    data.points.push_back(pt);
  }
  return data;
}

SweepResult run_sweep(const ExperimentConfig& config, const RunOptions& opt) {
  const ExperimentConfig cfg = opt.ideal ? ideal_config(config) : config;
  const std::uint64_t seed = opt.seed.value_or(cfg.seed);
  const auto& sw = cfg.sweep;
  if (sw.points < 2 || !(sw.power_stop_mw > sw.power_start_mw)) throw InvalidArgument("degenerate sweep range");

  std::vector<double> powers(static_cast<std::size_t>(sw.points));
  for (int i = 0; i < sw.points; ++i) {
    powers[static_cast<std::size_t>(i)] =
        sw.power_start_mw + (sw.power_stop_mw - sw.power_start_mw) * static_cast<double>(i) / (sw.points - 1);
  }
  const auto labels = sweep_labels(cfg.circuit.device);
  const auto t = transmissions(cfg);

  SweepResult res;
  for (const auto& label : labels) res.datasets.push_back({label, {}});
  for (std::size_t i = 0; i < powers.size(); ++i) {
    const auto ensemble = ensemble_at(cfg, powers[i]);
    for (std::size_t d = 0; d < labels.size(); ++d) {
      const auto& label = labels[d];
      const OutcomeProbabilities p =
          cfg.circuit.device == Device::A
              ? path_outcome(ensemble, label, t)
              : polarization_outcome(ensemble, {pol_from_char(label[0]), pol_from_char(label[1])}, t);
      res.datasets[d].points.push_back(
          {powers[i], record_for(cfg, p, sw.duration_per_point_s, opt.ideal, derive_seed(seed, {d, i}))});
    }
  }

  FitOptions fo;
  fo.period_seed_mw = cfg.circuit.calibration.power_for_2pi_mw;
  for (const auto& ds : res.datasets) {
    res.fits.push_back(fit_fringe(ds, fo));
    const auto& f = res.fits.back();
    if (!f.raw.converged || !f.net.converged) res.runtime_flag = true;
  }

  if (opt.out_dir.empty()) return res;
  ensure_dir(opt.out_dir);
  for (const auto& ds : res.datasets) {
    const auto path = opt.out_dir / ("fringe_" + file_tag(ds.label) + ".csv");
    write_fringe_csv(path, ds);
    res.files.push_back(path);
  }

  std::string s;
  s += "# fringe sweep\n";
  s += "device = " + std::string(to_string(cfg.circuit.device)) + "\n";
  s += "mode = " + std::string(opt.ideal ? "ideal" : "noisy") + "\n";
  s += "seed = " + std::to_string(seed) + "\n";
  s += "points = " + std::to_string(sw.points) + "\n";
  s += "duration_per_point_s = " + g17(sw.duration_per_point_s) + "\n\n";
  s += "label  V_raw     err       V_net     err       period_mW   phase0_rad  flags\n";
  for (const auto& f : res.fits) {
    std::string flags;
    auto add = [&](bool on, const char* name) {
      if (on) flags += (flags.empty() ? "" : ",") + std::string(name);
    };
    add(!f.raw.converged || !f.net.converged, "not_converged");
    add(f.raw.degenerate || f.net.degenerate, "flat");
    add(f.raw.visibility_clamped || f.net.visibility_clamped, "clamped");
    char line[256];
    std::snprintf(line, sizeof line, "%-6s %.6f  %.6f  %.6f  %.6f  %10.4f  %+.6f  %s\n", f.label.c_str(),
                  f.raw.visibility, f.raw.visibility_error, f.net.visibility, f.net.visibility_error, f.net.period,
                  f.net.phase0, flags.empty() ? "-" : flags.c_str());
    s += line;
  }
  if (cfg.circuit.device == Device::A && res.fits.size() == 2) {
    s += "\nphase difference 11 vs 02 (rad) = " +
         fmt("%.6f", wrap_2pi(res.fits[0].net.phase0 - res.fits[1].net.phase0)) + "\n";
  }
  const auto summary = opt.out_dir / "sweep_summary.txt";
  write_text(summary, s);
  res.files.push_back(summary);
  return res;
}

// --- tomography -------------------------------------------------------------

std::string format_density_matrix(const DensityMatrix4& rho) {
  static const char* kBasis[] = {"HH", "HV", "VH", "VV"};
  std::string s = "# real part (rows/columns HH HV VH VV)\n";
  for (int r = 0; r < 4; ++r) {
    s += kBasis[r];
    for (int c = 0; c < 4; ++c) s += " " + fmt("%+.8f", rho.matrix()(r, c).real());
    s += "\n";
  }
  s += "# imaginary part\n";
  for (int r = 0; r < 4; ++r) {
    s += kBasis[r];
    for (int c = 0; c < 4; ++c) s += " " + fmt("%+.8f", rho.matrix()(r, c).imag());
    s += "\n";
  }
  return s;
}

namespace {

std::size_t setting_index(const std::vector<TomographySetting>& settings, PolState a, PolState b) {
  for (std::size_t i = 0; i < settings.size(); ++i) {
    if (settings[i].first == a && settings[i].second == b) return i;
  }
  throw InvalidArgument("setting missing from tomography list");
}

std::array<Correlation, 3> correlations_from(const std::vector<TomographySetting>& settings,
                                             std::span<const double> net) {
  auto corr = [&](PolState p, PolState m) {
    return pauli_correlation(net[setting_index(settings, p, p)], net[setting_index(settings, p, m)],
                             net[setting_index(settings, m, p)], net[setting_index(settings, m, m)]);
  };
  return {corr(PolState::D, PolState::A), corr(PolState::R, PolState::L), corr(PolState::H, PolState::V)};
}

}  // namespace

TomographyReport run_tomography(const ExperimentConfig& config, const RunOptions& opt) {
  const ExperimentConfig cfg = opt.ideal ? ideal_config(config) : config;
  if (cfg.circuit.device != Device::B) throw InvalidArgument("tomography needs device b (polarization entangler)");
  const std::uint64_t seed = opt.seed.value_or(cfg.seed);
  const auto& tc = cfg.tomography;
  if (tc.bootstrap_resamples < kMinBootstrapResamples) throw InvalidArgument("bootstrap needs at least 100 resamples");

  TomographyReport rep;
  rep.phase_power_mw = opt.phase_power_mw.value_or(tc.phase_power_mw);
  rep.settings = full_tomography_settings();
  const auto ensemble = ensemble_at(cfg, rep.phase_power_mw);
  const auto t = transmissions(cfg);
  for (std::size_t k = 0; k < rep.settings.size(); ++k) {
    const OutcomeProbabilities p = polarization_outcome(ensemble, rep.settings[k], t);
    rep.records.push_back(
        record_for(cfg, p, tc.duration_per_setting_s, opt.ideal, derive_seed(seed, {1000, k})));
  }

  std::vector<double> coincidences;
  std::vector<double> accidentals;
  for (const auto& r : rep.records) {
    coincidences.push_back(r.coincidences);
    accidentals.push_back(r.accidentals_estimate);
  }
  auto net_of = [&](std::span<const double> c) {
    std::vector<double> net(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) net[k] = std::max(0.0, c[k] - accidentals[k]);
    return net;
  };
  auto reconstruct = [&](std::span<const double> net) {
    std::vector<TomographyCount> counts;
    for (std::size_t k = 0; k < net.size(); ++k) counts.push_back({rep.settings[k], net[k]});
    return tomography_mle(counts);
  };

  const auto net0 = net_of(coincidences);
  rep.mle = reconstruct(net0);
  rep.target = nearest_bell_state(rep.mle.rho).state;
  const DensityMatrix4 target = bell_state(rep.target);

  // Accidentals are an estimate from the singles; only the coincidences are resampled.
  const Pipeline pipeline = [&](std::span<const double> c) {
    const auto net = net_of(c);
    const TomographyResult r = reconstruct(net);
    const auto corr = correlations_from(rep.settings, net);
    const WitnessResult w = witness_S(corr);
    return std::vector<double>{fidelity(r.rho, target), purity(r.rho), concurrence(r.rho), w.s};
  };
  const BootstrapResult boot = bootstrap_errors(pipeline, coincidences, tc.bootstrap_resamples,
                                                derive_seed(seed, {2000}));
  rep.bootstrap_resamples = boot.resamples;
  rep.bootstrap_failures = boot.failures;
  rep.fidelity = {boot.estimate[0], boot.error[0]};
  rep.purity = {boot.estimate[1], boot.error[1]};
  rep.concurrence = {boot.estimate[2], boot.error[2]};
  rep.witness = {boot.estimate[3], boot.error[3]};
  rep.correlations = correlations_from(rep.settings, net0);
  if (rep.witness.error > 0.0) {
    rep.significance = (rep.witness.value - 1.0) / rep.witness.error;
  } else if (rep.witness.value > 1.0) {
    rep.significance = std::numeric_limits<double>::infinity();
  }
  rep.runtime_flag = !rep.mle.converged || boot.failures > 0;

  if (opt.out_dir.empty()) return rep;
  ensure_dir(opt.out_dir);

  std::string csv = "first,second," + count_record_csv_header() + ",net_counts,net_error\n";
  for (std::size_t k = 0; k < rep.settings.size(); ++k) {
    const NetCounts n = subtract_accidentals(rep.records[k]);
    csv += std::string(to_string(rep.settings[k].first)) + "," + std::string(to_string(rep.settings[k].second)) +
           "," + to_csv_row(rep.records[k]) + "," + g17(n.net) + "," + g17(n.error) + "\n";
  }
  const auto counts_path = opt.out_dir / "tomography_counts.csv";
  write_text(counts_path, csv);
  const auto rho_path = opt.out_dir / "density_matrix.txt";
  write_text(rho_path, format_density_matrix(rep.mle.rho));

  std::string m;
  auto line = [&](const std::string& name, const ValueWithError& v) {
    m += name + " = " + fmt("%.6f", v.value) + " +- " + fmt("%.6f", v.error) + "\n";
  };
  m += "# tomography metrics\n";
  m += "mode = " + std::string(opt.ideal ? "ideal" : "noisy") + "\n";
  m += "seed = " + std::to_string(seed) + "\n";
  m += "phase_power_mW = " + g17(rep.phase_power_mw) + "\n";
  m += "settings = " + std::to_string(rep.settings.size()) + "\n";
  m += "nearest_bell_state = " + std::string(to_string(rep.target)) + "\n";
  line("fidelity", rep.fidelity);
  line("purity", rep.purity);
  line("concurrence", rep.concurrence);
  line("witness_S", rep.witness);
  m += "witness_significance_sigma = " + fmt("%.2f", rep.significance) + "\n";
  static const char* kNames[] = {"XX", "YY", "ZZ"};
  for (int i = 0; i < 3; ++i) {
    m += std::string("correlation_") + kNames[i] + " = " + fmt("%+.6f", rep.correlations[i].value) + " +- " +
         fmt("%.6f", rep.correlations[i].error) + "\n";
  }
  m += "mle_iterations = " + std::to_string(rep.mle.iterations) + "\n";
  m += "bootstrap_resamples = " + std::to_string(rep.bootstrap_resamples) + "\n";
  m += "bootstrap_failures = " + std::to_string(rep.bootstrap_failures) + "\n";
  std::string flags;
  if (!rep.mle.converged) flags += "mle_iteration_cap ";
  if (rep.bootstrap_failures > 0) flags += "bootstrap_failures ";
  if (!flags.empty()) flags.pop_back();
  m += "flags = " + (flags.empty() ? std::string("none") : flags) + "\n";
  const auto metrics_path = opt.out_dir / "metrics.txt";
  write_text(metrics_path, m);
  rep.files = {counts_path, rho_path, metrics_path};
  return rep;
}

// --- shg -------------------------------------------------------------------

ShgReport run_shg(const ExperimentConfig& cfg, const RunOptions& opt) {
  ShgReport rep;
  rep.waveguide1 = shg_spectrum(cfg.circuit.qpm[0], cfg.shg_grid);
  rep.waveguide2 = shg_spectrum(cfg.circuit.qpm[1], cfg.shg_grid);
  rep.overlap = spectral_overlap(rep.waveguide1, rep.waveguide2);
  if (opt.out_dir.empty()) return rep;
  ensure_dir(opt.out_dir);

  std::string csv = "wavelength_nm,intensity_1,intensity_2\n";
  for (std::size_t i = 0; i < rep.waveguide1.wavelengths_nm.size(); ++i) {
    csv += g17(rep.waveguide1.wavelengths_nm[i]) + "," + g17(rep.waveguide1.intensity[i]) + "," +
           g17(rep.waveguide2.intensity[i]) + "\n";
  }
  const auto csv_path = opt.out_dir / "shg_spectra.csv";
  write_text(csv_path, csv);

  std::string s = "# second-harmonic spectra\n";
  for (int w = 0; w < 2; ++w) {
    const auto& q = cfg.circuit.qpm[static_cast<std::size_t>(w)];
    const auto& sp = w == 0 ? rep.waveguide1 : rep.waveguide2;
    const std::string tag = "waveguide" + std::to_string(w + 1);
    s += tag + ".peak_nm = " + fmt("%.4f", sp.peak_wavelength_nm) + "\n";
    s += tag + ".first_zero_offset_nm = " + fmt("%.4f", first_zero_offset(q)) + "\n";
  }
  s += "grid_step_nm = " + g17(cfg.shg_grid.step_nm) + "\n";
  s += "overlap = " + fmt("%.6f", rep.overlap) + "\n";
  const auto report_path = opt.out_dir / "shg_report.txt";
  write_text(report_path, s);
  rep.files = {csv_path, report_path};
  return rep;
}

// --- validate --------------------------------------------------------------

std::vector<Check> run_validate(const ExperimentConfig& cfg) {
  std::vector<Check> checks;
  auto run = [&](const std::string& name, const std::function<std::string()>& body) {
    try {
      checks.push_back({name, true, body()});
    } catch (const std::exception& e) {
      checks.push_back({name, false, e.what()});
    }
  };
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw InvalidArgument(msg);
  };

  run("calibration", [&] {
    const auto& cal = cfg.circuit.calibration;
    cal.validate();
    const double span = power_to_phase(cal.power_for_2pi_mw, cal) - power_to_phase(0.0, cal);
    require(std::abs(span - 2.0 * std::numbers::pi) <= 1e-12, "2pi point does not map to 2pi");
    return "2pi at " + g17(cal.power_for_2pi_mw) + " mW";
  });
  run("source", [&] {
    cfg.circuit.spdc.validate();
    return "coherence " + fmt("%g", cfg.circuit.spdc.coherence);
  });

  const double mid = 0.5 * (cfg.sweep.power_start_mw + cfg.sweep.power_stop_mw);
  for (double p : {cfg.sweep.power_start_mw, mid, cfg.sweep.power_stop_mw}) {
    run("unitarity @ " + fmt("%.1f", p) + " mW", [&] {
      CircuitSpec spec = build_device_circuit(cfg.circuit.device, p, cfg.circuit.calibration);
      spec.components.insert(spec.components.end(), cfg.circuit.components.begin(), cfg.circuit.components.end());
      const double defect = unitarity_defect(compile_circuit(spec).matrix());
      require(defect <= 1e-10, "defect " + fmt("%.3e", defect));
      return "max |U^dag U - I| = " + fmt("%.1e", defect);
    });
    run("closure @ " + fmt("%.1f", p) + " mW", [&] {
      const auto ens = ensemble_at(cfg, p);
      double total = 0.0;
      for (const auto& b : ens) total += b.weight * b.state.norm_squared();
      require(std::abs(total - 1.0) <= 1e-9, "total probability " + g17(total));
      const double paths = path_pattern_probability(ens, 1, 1) + path_pattern_probability(ens, 2, 0) +
                           path_pattern_probability(ens, 0, 2);
      require(std::abs(paths - 1.0) <= 1e-9, "P11 + P20 + P02 = " + g17(paths));
      if (cfg.circuit.device == Device::B) {
        const double ps = ensemble_polarization_state(ens).probability;
        require(ps > 0.0 && ps <= 1.0, "post-selection probability " + g17(ps));
        return "P(one photon per path) = " + fmt("%.6f", ps);
      }
      return "P11 + P20 + P02 = " + fmt("%.12f", paths);
    });
  }

  run("noise", [&] {
    cfg.noise.params.validate();
    return "pair rate " + g17(cfg.noise.params.pair_rate_hz) + " Hz";
  });
  for (int i = 0; i < 2; ++i) {
    run("detector " + std::to_string(i + 1), [&] {
      cfg.noise.detectors[static_cast<std::size_t>(i)].validate();
      return std::string(cfg.noise.detectors[static_cast<std::size_t>(i)].mode == DetectorMode::Gated ? "gated"
                                                                                                    : "free running");
    });
  }
  run("operating point", [&] {
    const auto p = outcome_probabilities(cfg, mid, sweep_labels(cfg.circuit.device).front());
    const ExpectedRates r = expected_rates(p, cfg.noise.params, cfg.noise.detectors[0], cfg.noise.detectors[1]);
    return "singles " + fmt("%.0f", r.singles_1) + " / " + fmt("%.0f", r.singles_2) + " Hz, coincidences " +
           fmt("%.2f", r.true_coincidences) + " Hz";
  });
  run("sweep", [&] {
    require(static_cast<std::size_t>(cfg.sweep.points) >= FringeDataset::kMinPoints,
            "fewer points than a fringe fit needs");
    return std::to_string(cfg.sweep.points) + " points";
  });
  run("shg", [&] {
    const ShgReport rep = run_shg(cfg);
    return "peaks " + fmt("%.3f", rep.waveguide1.peak_wavelength_nm) + " / " +
           fmt("%.3f", rep.waveguide2.peak_wavelength_nm) + " nm, overlap " + fmt("%.4f", rep.overlap);
  });
  return checks;
}

std::string format_checks(const std::vector<Check>& checks) {
  std::size_t width = 5;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  std::string s;
  for (const auto& c : checks) {
    s += std::string(c.ok ? "ok    " : "FAIL  ") + c.name + std::string(width - c.name.size() + 2, ' ') + c.detail +
         "\n";
  }
  return s;
}

}  // namespace epsim
