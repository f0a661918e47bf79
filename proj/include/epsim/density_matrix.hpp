#pragma once

#include <Eigen/Dense>

namespace epsim {

// Two-qubit polarization density matrix, basis order {HH, HV, VH, VV}
// (first index = path 0). Construction validates Hermiticity and unit
// trace to 1e-10 and eigenvalues >= -1e-9.
class DensityMatrix4 {
 public:
  static constexpr double kHermitianTol = 1e-10;
  static constexpr double kTraceTol = 1e-10;
  static constexpr double kEigenTol = -1e-9;

  explicit DensityMatrix4(const Eigen::Matrix4cd& m);

  // |psi><psi| / <psi|psi>.
  static DensityMatrix4 from_pure(const Eigen::Vector4cd& psi);
  static DensityMatrix4 maximally_mixed();

  const Eigen::Matrix4cd& matrix() const noexcept { return m_; }
  std::complex<double> operator()(int r, int c) const { return m_(r, c); }

  // Convex combination w*a + (1-w)*b.
  static DensityMatrix4 mix(double w, const DensityMatrix4& a, const DensityMatrix4& b);

  // U rho U† for a two-qubit unitary.
  DensityMatrix4 transformed(const Eigen::Matrix4cd& u) const;

 private:
  Eigen::Matrix4cd m_;
};

enum class BellState { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

Eigen::Vector4cd bell_vector(BellState b);
DensityMatrix4 bell_state(BellState b);
const char* to_string(BellState b);

}  // namespace epsim
