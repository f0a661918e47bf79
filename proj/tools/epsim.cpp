// epsim: run phase sweeps, tomography, SHG spectra and config validation.
//
// Exit codes: 0 success, 1 usage, 2 configuration error, 3 a runtime flag
// was raised (non-converged fit or MLE, failed checks), 4 I/O failure,
// 5 anything else.

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "epsim/config.hpp"
#include "epsim/experiment.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kFlag = 3, kIo = 4, kOther = 5 };

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool no_noise = false;
  std::optional<double> phase_power;
};

epsim::ExperimentConfig load(const Args& a) {
  if (a.config.empty()) return {};
  return epsim::load_config(a.config);
}

epsim::RunOptions options(const Args& a, const epsim::ExperimentConfig& cfg) {
  epsim::RunOptions o;
  o.out_dir = a.out.empty() ? std::filesystem::path(cfg.outputs) : std::filesystem::path(a.out);
  o.ideal = a.no_noise;
  o.seed = a.seed;
  o.phase_power_mw = a.phase_power;
  return o;
}

void print_files(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
}

int cmd_sweep(const Args& a) {
  const auto cfg = load(a);
  const auto res = epsim::run_sweep(cfg, options(a, cfg));
  for (const auto& f : res.fits) {
    std::printf("%-3s V_raw = %.4f +- %.4f  V_net = %.4f +- %.4f%s\n", f.label.c_str(), f.raw.visibility,
                f.raw.visibility_error, f.net.visibility, f.net.visibility_error, f.flagged() ? "  [flagged]" : "");
  }
  std::fflush(stdout);
  print_files(res.files);
  return res.runtime_flag ? kFlag : kOk;
}

int cmd_tomography(const Args& a) {
  const auto cfg = load(a);
  const auto rep = epsim::run_tomography(cfg, options(a, cfg));
  std::printf("nearest Bell state %s\n", epsim::to_string(rep.target));
  std::printf("F = %.4f +- %.4f  purity = %.4f +- %.4f  C = %.4f +- %.4f  S = %.4f +- %.4f (%.1f sigma)\n",
              rep.fidelity.value, rep.fidelity.error, rep.purity.value, rep.purity.error, rep.concurrence.value,
              rep.concurrence.error, rep.witness.value, rep.witness.error, rep.significance);
  std::fflush(stdout);
  print_files(rep.files);
  return rep.runtime_flag ? kFlag : kOk;
}

int cmd_shg(const Args& a) {
  const auto cfg = load(a);
  const auto rep = epsim::run_shg(cfg, options(a, cfg));
  std::printf("peaks %.3f nm / %.3f nm, overlap %.6f\n", rep.waveguide1.peak_wavelength_nm,
              rep.waveguide2.peak_wavelength_nm, rep.overlap);
  std::fflush(stdout);
  print_files(rep.files);
  return kOk;
}

int cmd_validate(const Args& a) {
  epsim::ConfigParse parsed;
  if (!a.config.empty()) parsed = epsim::parse_config_file(a.config);
  if (!parsed.ok()) {
    for (const auto& i : parsed.issues) std::cout << "FAIL  " << i.path << "  " << i.message << "\n";
    return kConfig;
  }
  const auto checks = epsim::run_validate(parsed.config);
  std::cout << epsim::format_checks(checks);
  for (const auto& c : checks) {
    if (!c.ok) return kFlag;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator of a reconfigurable integrated entangled-photon source"};
  app.require_subcommand(1);
  Args args;

  auto common = [&](CLI::App* sub, bool runs) {
    sub->add_option("--config", args.config, "Experiment configuration (JSON)")->check(CLI::ExistingFile);
    if (!runs) return;
    sub->add_option("--seed", args.seed, "Override the configured seed");
    sub->add_option("--out", args.out, "Output directory (default: config 'outputs')");
    sub->add_flag("--no-noise", args.no_noise, "Ideal mode: no dark counts or accidentals, expected counts");
  };
  auto* sweep = app.add_subcommand("sweep", "Phase sweep: fringe CSVs and visibility fits");
  common(sweep, true);
  auto* tomo = app.add_subcommand("tomography", "Two-qubit state tomography with bootstrap errors");
  common(tomo, true);
  tomo->add_option("--phase-power", args.phase_power, "Heater power in mW (overrides config)");
  auto* shg = app.add_subcommand("shg", "Second-harmonic spectra of both waveguides and their overlap");
  common(shg, true);
  auto* validate = app.add_subcommand("validate", "Check every invariant reachable from a configuration");
  common(validate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sweep) return cmd_sweep(args);
    if (*tomo) return cmd_tomography(args);
    if (*shg) return cmd_shg(args);
    return cmd_validate(args);
  } catch (const epsim::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kConfig;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
}
