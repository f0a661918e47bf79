#include "epsim/polarization.hpp"

#include <cmath>
#include <string>

#include "epsim/density_matrix.hpp"
#include "epsim/error.hpp"

namespace epsim {

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
constexpr std::complex<double> kI{0.0, 1.0};
}  // namespace

Eigen::Vector2cd jones(PolState s) {
  switch (s) {
    case PolState::H: return {1.0, 0.0};
    case PolState::V: return {0.0, 1.0};
    case PolState::D: return {kInvSqrt2, kInvSqrt2};
    case PolState::A: return {kInvSqrt2, -kInvSqrt2};
    case PolState::R: return {kInvSqrt2, -kI * kInvSqrt2};
    case PolState::L: return {kInvSqrt2, kI * kInvSqrt2};
  }
  throw InvalidArgument("unknown polarization state");
}

PolState orthogonal(PolState s) {
  switch (s) {
    case PolState::H: return PolState::V;
    case PolState::V: return PolState::H;
    case PolState::D: return PolState::A;
    case PolState::A: return PolState::D;
    case PolState::R: return PolState::L;
    case PolState::L: return PolState::R;
  }
  throw InvalidArgument("unknown polarization state");
}

std::string_view to_string(Polarization p) { return p == Polarization::H ? "H" : "V"; }

std::string_view to_string(PolState s) {
  static constexpr std::string_view names[] = {"H", "V", "D", "A", "R", "L"};
  return names[static_cast<int>(s)];
}

PolState pol_state_from_string(std::string_view name) {
  for (PolState s : kAllPolStates) {
    if (to_string(s) == name) return s;
  }
  throw InvalidArgument("unknown polarization state '" + std::string(name) + "'");
}

Polarization polarization_from_string(std::string_view name) {
  if (name == "H") return Polarization::H;
  if (name == "V") return Polarization::V;
  throw InvalidArgument("polarization must be H or V, got '" + std::string(name) + "'");
}

// --- DensityMatrix4 ---------------------------------------------------------

DensityMatrix4::DensityMatrix4(const Eigen::Matrix4cd& m) : m_(m) {
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) {
    throw InvalidArgument("density matrix is not Hermitian");
  }
  if (std::abs(m.trace() - 1.0) > kTraceTol) {
    throw InvalidArgument("density matrix trace differs from 1");
  }
  m_ = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < kEigenTol) {
    throw InvalidArgument("density matrix has a negative eigenvalue");
  }
}

DensityMatrix4 DensityMatrix4::from_pure(const Eigen::Vector4cd& psi) {
  const double n2 = psi.squaredNorm();
  if (n2 <= 0.0) throw InvalidArgument("zero state vector");
  return DensityMatrix4(psi * psi.adjoint() / n2);
}

DensityMatrix4 DensityMatrix4::maximally_mixed() {
  return DensityMatrix4(Eigen::Matrix4cd::Identity() / 4.0);
}

DensityMatrix4 DensityMatrix4::mix(double w, const DensityMatrix4& a, const DensityMatrix4& b) {
  if (w < 0.0 || w > 1.0) throw InvalidArgument("mixing weight outside [0,1]");
  return DensityMatrix4(w * a.m_ + (1.0 - w) * b.m_);
}

DensityMatrix4 DensityMatrix4::transformed(const Eigen::Matrix4cd& u) const {
  return DensityMatrix4(u * m_ * u.adjoint());
}

Eigen::Vector4cd bell_vector(BellState b) {
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  switch (b) {
    case BellState::PhiPlus: v << 1, 0, 0, 1; break;
    case BellState::PhiMinus: v << 1, 0, 0, -1; break;
    case BellState::PsiPlus: v << 0, 1, 1, 0; break;
    case BellState::PsiMinus: v << 0, 1, -1, 0; break;
  }
  return v * kInvSqrt2;
}

DensityMatrix4 bell_state(BellState b) { return DensityMatrix4::from_pure(bell_vector(b)); }

const char* to_string(BellState b) {
  switch (b) {
    case BellState::PhiPlus: return "phi+";
    case BellState::PhiMinus: return "phi-";
    case BellState::PsiPlus: return "psi+";
    case BellState::PsiMinus: return "psi-";
  }
  return "?";
}

}  // namespace epsim
