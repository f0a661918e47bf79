#include "epsim/measurement.hpp"

#include "epsim/error.hpp"

namespace epsim {

namespace {

double transmission(const std::vector<double>& t, int path) {
  return static_cast<std::size_t>(path) < t.size() ? t[static_cast<std::size_t>(path)] : 1.0;
}

}  // namespace

OutcomeProbabilities path_outcome(const std::vector<Branch>& ensemble, const std::string& label,
                                  const std::vector<double>& path_transmission) {
  if (ensemble.empty()) throw InvalidArgument("empty ensemble");
  const ModeSet& modes = ensemble.front().state.modes();
  auto mean_photons = [&](int path) {
    double m = 0.0;
    for (const auto& b : ensemble) {
      for (const auto& [pattern, amp] : b.state.terms()) {
        m += b.weight * std::norm(amp) * photons_on_path(modes, pattern, path);
      }
    }
    return m;
  };

  OutcomeProbabilities p;
  if (label == "11") {
    const double t0 = transmission(path_transmission, 0);
    const double t1 = transmission(path_transmission, 1);
    p.coincidence = path_pattern_probability(ensemble, 1, 1) * t0 * t1;
    p.arm1 = mean_photons(0) * t0;
    p.arm2 = mean_photons(1) * t1;
  } else if (label == "02" || label == "20") {
    const int path = label == "02" ? 1 : 0;
    const double t = transmission(path_transmission, path);
    // A balanced fiber splitter separates the two photons half of the time.
    const double both = label == "02" ? path_pattern_probability(ensemble, 0, 2) : path_pattern_probability(ensemble, 2, 0);
    p.coincidence = 0.5 * both * t * t;
    p.arm1 = 0.5 * mean_photons(path) * t;
    p.arm2 = p.arm1;
  } else {
    throw InvalidArgument("unknown path outcome '" + label + "'");
  }
  return p;
}

OutcomeProbabilities polarization_outcome(const std::vector<Branch>& ensemble, const TomographySetting& setting,
                                          const std::vector<double>& path_transmission) {
  if (ensemble.empty()) throw InvalidArgument("empty ensemble");
  const ModeSet& modes = ensemble.front().state.modes();
  CircuitSpec analysis{modes, {ComponentSpec::hwp(0, 22.5), ComponentSpec::hwp(1, 22.5)}};
  const ModeUnitary compensation = compile_circuit(analysis);
  const ModeUnitary u = analyzer_unitary(modes, setting.second, 1)
                            .after(analyzer_unitary(modes, setting.first, 0))
                            .after(compensation);
  const std::size_t h0 = modes.index_of({0, Polarization::H});
  const std::size_t h1 = modes.index_of({1, Polarization::H});

  OutcomeProbabilities p;
  for (const auto& b : ensemble) {
    const FockVector out = apply_unitary(b.state, u);
    for (const auto& [pattern, amp] : out.terms()) {
      const double w = b.weight * std::norm(amp);
      const int n0 = pattern.counts[h0];
      const int n1 = pattern.counts[h1];
      if (n0 == 1 && n1 == 1) p.coincidence += w;
      p.arm1 += w * n0;
      p.arm2 += w * n1;
    }
  }
  const double t0 = transmission(path_transmission, 0);
  const double t1 = transmission(path_transmission, 1);
  p.coincidence *= t0 * t1;
  p.arm1 *= t0;
  p.arm2 *= t1;
  return p;
}

}  // namespace epsim
