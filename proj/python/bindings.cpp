#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <string>

#include "epsim/analysis.hpp"
#include "epsim/config.hpp"
#include "epsim/experiment.hpp"
#include "epsim/source.hpp"

namespace py = pybind11;
using namespace epsim;

namespace {

Device device_from(const std::string& name) {
  if (name == "a") return Device::A;
  if (name == "b") return Device::B;
  throw InvalidArgument("device must be 'a' or 'b'");
}

DensityMatrix4 density(const Eigen::Matrix4cd& m) { return DensityMatrix4(m); }

RunOptions options(const std::string& out_dir, std::optional<std::uint64_t> seed, bool ideal) {
  RunOptions o;
  o.out_dir = out_dir;
  o.seed = seed;
  o.ideal = ideal;
  return o;
}

py::dict fit_dict(const SinusoidFit& f) {
  py::dict d;
  d["visibility"] = f.visibility;
  d["visibility_error"] = f.visibility_error;
  d["period_mW"] = f.period;
  d["phase0_rad"] = f.phase0;
  d["converged"] = f.converged;
  d["degenerate"] = f.degenerate;
  return d;
}

py::tuple value_error(const ValueWithError& v) { return py::make_tuple(v.value, v.error); }

}  // namespace

PYBIND11_MODULE(_epsim, m) {
  m.doc() = "Entangled-photon source simulator: circuits, detection, analysis.";
  m.attr("__version__") = "0.1.0";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::enum_<BellState>(m, "BellState")
      .value("PhiPlus", BellState::PhiPlus)
      .value("PhiMinus", BellState::PhiMinus)
      .value("PsiPlus", BellState::PsiPlus)
      .value("PsiMinus", BellState::PsiMinus);

  m.def("bell_state", [](BellState b) { return bell_state(b).matrix(); }, py::arg("state"));

  m.def(
      "device_probabilities",
      [](const std::string& device, double phase_power_mw, double coherence, double hwp_efficiency) {
        SpdcParams spdc;
        spdc.coherence = coherence;
        DeviceImperfections imp;
        imp.hwp_efficiency = hwp_efficiency;
        const auto e = device_output_ensemble(device_from(device), phase_power_mw, PhaseShifterCalibration{}, spdc, imp);
        std::map<std::string, double> p;
        p["11"] = path_pattern_probability(e, 1, 1);
        p["20"] = path_pattern_probability(e, 2, 0);
        p["02"] = path_pattern_probability(e, 0, 2);
        return p;
      },
      py::arg("device"), py::arg("phase_power_mw"), py::arg("coherence") = 1.0, py::arg("hwp_efficiency") = 1.0,
      "Path photon-number probabilities after device 3a or 3b (default heater calibration).");

  m.def(
      "polarization_state",
      [](double phase_power_mw, double coherence, double hwp_efficiency, bool rotated) {
        SpdcParams spdc;
        spdc.coherence = coherence;
        DeviceImperfections imp;
        imp.hwp_efficiency = hwp_efficiency;
        const auto e = device_output_ensemble(Device::B, phase_power_mw, PhaseShifterCalibration{}, spdc, imp);
        const PolarizationState ps = ensemble_polarization_state(e);
        const DensityMatrix4 rho = rotated ? ps.rho.transformed(compensation_rotation()) : ps.rho;
        return py::make_tuple(rho.matrix(), ps.probability);
      },
      py::arg("phase_power_mw"), py::arg("coherence") = 1.0, py::arg("hwp_efficiency") = 1.0,
      py::arg("rotated") = true,
      "Post-selected polarization state of device 3b and its success probability.");

  m.def("fidelity", [](const Eigen::Matrix4cd& a, const Eigen::Matrix4cd& b) { return fidelity(density(a), density(b)); });
  m.def("purity", [](const Eigen::Matrix4cd& a) { return purity(density(a)); });
  m.def("concurrence", [](const Eigen::Matrix4cd& a) { return concurrence(density(a)); });
  m.def("trace_distance",
        [](const Eigen::Matrix4cd& a, const Eigen::Matrix4cd& b) { return trace_distance(density(a), density(b)); });

  m.def(
      "pauli_correlation",
      [](double pp, double pm, double mp, double mm) {
        const Correlation c = pauli_correlation(pp, pm, mp, mm);
        return py::make_tuple(c.value, c.error);
      },
      py::arg("n_pp"), py::arg("n_pm"), py::arg("n_mp"), py::arg("n_mm"));

  m.def(
      "witness",
      [](const std::array<std::pair<double, double>, 3>& corr) {
        std::array<Correlation, 3> c;
        for (std::size_t i = 0; i < 3; ++i) c[i] = {corr[i].first, corr[i].second};
        const WitnessResult w = witness_S(c);
        return py::make_tuple(w.s, w.sigma, w.significance);
      },
      py::arg("correlations"), "S = |E_XX| + |E_YY| + |E_ZZ| from three (value, error) pairs.");

  m.def(
      "tomography_mle",
      [](const std::map<std::string, double>& counts) {
        std::vector<TomographyCount> c;
        for (const auto& [key, n] : counts) {
          if (key.size() != 2) throw InvalidArgument("setting keys are two letters, e.g. 'HD'");
          c.push_back({{pol_state_from_string(key.substr(0, 1)), pol_state_from_string(key.substr(1, 1))}, n});
        }
        const TomographyResult r = tomography_mle(c);
        return py::make_tuple(r.rho.matrix(), r.converged);
      },
      py::arg("counts"), "Maximum-likelihood density matrix from {'HV': counts, ...}.");

  m.def(
      "shg_spectrum",
      [](double pump_center_nm, double effective_index_slope, double length_mm, double start_nm, double stop_nm,
         double step_nm) {
        QpmParams q;
        q.pump_center_nm = pump_center_nm;
        q.effective_index_slope = effective_index_slope;
        q.length_mm = length_mm;
        const ShgSpectrum s = shg_spectrum(q, WavelengthGrid{start_nm, stop_nm, step_nm});
        return py::make_tuple(s.wavelengths_nm, s.intensity, s.peak_wavelength_nm);
      },
      py::arg("pump_center_nm") = 780.31, py::arg("effective_index_slope") = 0.12, py::arg("length_mm") = 18.0,
      py::arg("start_nm") = 779.31, py::arg("stop_nm") = 781.31, py::arg("step_nm") = 0.001);

  m.def(
      "spectral_overlap",
      [](const std::vector<double>& wavelengths, const std::vector<double>& a, const std::vector<double>& b) {
        return spectral_overlap(ShgSpectrum{wavelengths, a, 0.0}, ShgSpectrum{wavelengths, b, 0.0});
      },
      py::arg("wavelengths_nm"), py::arg("intensity_a"), py::arg("intensity_b"));

  m.def(
      "load_config", [](const std::filesystem::path& p) { return to_json_text(load_config(p)); }, py::arg("path"),
      "Validated configuration, normalized to JSON text.");

  m.def(
      "run_sweep",
      [](const std::filesystem::path& config, const std::string& out_dir, std::optional<std::uint64_t> seed,
         bool ideal) {
        const SweepResult r = run_sweep(load_config(config), options(out_dir, seed, ideal));
        py::dict fits;
        for (const auto& f : r.fits) {
          py::dict d;
          d["raw"] = fit_dict(f.raw);
          d["net"] = fit_dict(f.net);
          fits[py::str(f.label)] = d;
        }
        return fits;
      },
      py::arg("config"), py::arg("out_dir") = "", py::arg("seed") = py::none(), py::arg("ideal") = false);

  m.def(
      "run_tomography",
      [](const std::filesystem::path& config, const std::string& out_dir, std::optional<std::uint64_t> seed,
         bool ideal) {
        const TomographyReport r = run_tomography(load_config(config), options(out_dir, seed, ideal));
        py::dict d;
        d["rho"] = r.mle.rho.matrix();
        d["nearest_bell_state"] = to_string(r.target);
        d["fidelity"] = value_error(r.fidelity);
        d["purity"] = value_error(r.purity);
        d["concurrence"] = value_error(r.concurrence);
        d["witness_S"] = value_error(r.witness);
        d["significance"] = r.significance;
        return d;
      },
      py::arg("config"), py::arg("out_dir") = "", py::arg("seed") = py::none(), py::arg("ideal") = false);

  m.def(
      "run_shg",
      [](const std::filesystem::path& config, const std::string& out_dir) {
        const ShgReport r = run_shg(load_config(config), options(out_dir, std::nullopt, false));
        return py::make_tuple(r.waveguide1.peak_wavelength_nm, r.waveguide2.peak_wavelength_nm, r.overlap);
      },
      py::arg("config"), py::arg("out_dir") = "");
}
