#include <algorithm>
#include <cmath>
#include <limits>

#include "epsim/analysis.hpp"
#include "epsim/error.hpp"

namespace epsim {

Correlation pauli_correlation(double n_pp, double n_pm, double n_mp, double n_mm) {
  for (double n : {n_pp, n_pm, n_mp, n_mm}) {
    if (!(n >= 0.0) || !std::isfinite(n)) throw InvalidArgument("counts must be finite and non-negative");
  }
  const double total = n_pp + n_pm + n_mp + n_mm;
  if (!(total > 0.0)) throw InvalidArgument("correlation needs a positive total count");
  Correlation c;
  c.value = (n_pp - n_pm - n_mp + n_mm) / total;
  c.error = std::sqrt(std::max(0.0, 1.0 - c.value * c.value) / total);
  return c;
}

WitnessResult witness_S(const std::array<Correlation, 3>& correlations) {
  WitnessResult w;
  double var = 0.0;
  for (const auto& c : correlations) {
    if (!(c.value >= -1.0 && c.value <= 1.0)) throw InvalidArgument("correlation outside [-1, 1]");
    w.s += std::abs(c.value);
    var += c.error * c.error;
  }
  w.sigma = std::sqrt(var);
  if (w.sigma > 0.0) {
    w.significance = (w.s - 1.0) / w.sigma;
  } else {
    w.significance = w.s > 1.0 ? std::numeric_limits<double>::infinity()
                     : w.s < 1.0 ? -std::numeric_limits<double>::infinity()
                                 : 0.0;
  }
  return w;
}

namespace {

constexpr double kRoundingFloor = 1e-14;

Eigen::Matrix4cd psd_sqrt(const Eigen::Matrix4cd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
  const Eigen::Vector4d root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.cast<std::complex<double>>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const DensityMatrix4& rho, const DensityMatrix4& sigma) {
  const Eigen::Matrix4cd r = psd_sqrt(rho.matrix());
  Eigen::Matrix4cd inner = r * sigma.matrix() * r;
  inner = 0.5 * (inner + inner.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(inner, Eigen::EigenvaluesOnly);
  // Rank-deficient inputs leave eigenvalues at rounding level whose square
  // roots would dominate the error budget; treat them as exact zeros.
  double tr = 0.0;
  for (double mu : es.eigenvalues()) {
    if (mu > kRoundingFloor) tr += std::sqrt(mu);
  }
  return std::clamp(tr * tr, 0.0, 1.0);
}

double purity(const DensityMatrix4& rho) { return std::clamp((rho.matrix() * rho.matrix()).trace().real(), 0.0, 1.0); }

double concurrence(const DensityMatrix4& rho) {
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  // sigma_y (x) sigma_y in {HH, HV, VH, VV}
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const Eigen::Matrix4cd flipped = yy * rho.matrix().conjugate() * yy;
  const Eigen::Matrix4cd r = psd_sqrt(rho.matrix());
  Eigen::Matrix4cd m = r * flipped * r;
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m, Eigen::EigenvaluesOnly);
  Eigen::Vector4d lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  std::sort(lam.data(), lam.data() + 4, std::greater<>());
  return std::clamp(lam[0] - lam[1] - lam[2] - lam[3], 0.0, 1.0);
}

double trace_distance(const DensityMatrix4& rho, const DensityMatrix4& sigma) {
  Eigen::Matrix4cd d = rho.matrix() - sigma.matrix();
  d = 0.5 * (d + d.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(d, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

BellMatch nearest_bell_state(const DensityMatrix4& rho) {
  BellMatch best;
  best.fidelity = -1.0;
  for (BellState b : {BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus}) {
    const Eigen::Vector4cd v = bell_vector(b);
    const double f = std::clamp((v.adjoint() * rho.matrix() * v)(0, 0).real(), 0.0, 1.0);
    if (f > best.fidelity) best = {b, f};
  }
  return best;
}

}  // namespace epsim
