#pragma once

// Detection probabilities for the two measurement apparatuses: photon-number
// resolved path outcomes (device 3a) and polarization-analyzed coincidences
// after compensation (device 3b).

#include <string>
#include <vector>

#include "epsim/analysis.hpp"
#include "epsim/detection.hpp"
#include "epsim/source.hpp"

namespace epsim {

// "11": one detector on each output path.
// "02": path 1 split by a fiber beam splitter onto both detectors.
// "20": same on path 0.
OutcomeProbabilities path_outcome(const std::vector<Branch>& ensemble, const std::string& label,
                                  const std::vector<double>& path_transmission = {});

// Coincidence of `setting.first` on path 0 with `setting.second` on path 1,
// measured after the compensation rotation.
OutcomeProbabilities polarization_outcome(const std::vector<Branch>& ensemble, const TomographySetting& setting,
                                          const std::vector<double>& path_transmission = {});

}  // namespace epsim
