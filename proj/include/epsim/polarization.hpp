#pragma once

#include <array>
#include <complex>
#include <string_view>

#include <Eigen/Dense>

namespace epsim {

enum class Polarization { H = 0, V = 1 };

// The six single-qubit polarization states used for analysis and tomography.
// Conventions: D = (H+V)/√2, A = (H−V)/√2, R = (H−iV)/√2, L = (H+iV)/√2.
enum class PolState { H, V, D, A, R, L };

inline constexpr std::array<PolState, 6> kAllPolStates = {PolState::H, PolState::V, PolState::D,
                                                          PolState::A, PolState::R, PolState::L};

Eigen::Vector2cd jones(PolState s);

// State orthogonal to `s` (H<->V, D<->A, R<->L).
PolState orthogonal(PolState s);

std::string_view to_string(Polarization p);
std::string_view to_string(PolState s);

// Throws InvalidArgument on anything other than the six single-letter names.
PolState pol_state_from_string(std::string_view name);
Polarization polarization_from_string(std::string_view name);

}  // namespace epsim
