#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "epsim/analysis.hpp"
#include "epsim/error.hpp"
#include "oracles.hpp"

using namespace epsim;

namespace {

DensityMatrix4 werner(double p) {
  return DensityMatrix4::mix(p, bell_state(BellState::PhiMinus), DensityMatrix4::maximally_mixed());
}

DensityMatrix4 product(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) {
  return DensityMatrix4::from_pure(Eigen::kroneckerProduct(a, b).eval());
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("fidelity reference values") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 10; ++i) {
      const DensityMatrix4 rho(oracle::random_density(rng));
      CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(fidelity(bell_state(BellState::PhiPlus), bell_state(BellState::PhiMinus)) < 1e-12);
    for (auto b : {BellState::PhiPlus, BellState::PsiMinus}) {
      CHECK(fidelity(DensityMatrix4::maximally_mixed(), bell_state(b)) == doctest::Approx(0.25));
    }
    const DensityMatrix4 pure = product(oracle::random_qubit(rng), oracle::random_qubit(rng));
    CHECK(fidelity(DensityMatrix4::maximally_mixed(), pure) == doctest::Approx(0.25));
  }

  TEST_CASE("fidelity is symmetric and invariant under local unitaries") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
      const DensityMatrix4 a(oracle::random_density(rng, 1 + i % 4));
      const DensityMatrix4 b(oracle::random_density(rng, 1 + (i + 1) % 4));
      CHECK(std::abs(fidelity(a, b) - fidelity(b, a)) <= 1e-10);
      const Eigen::Matrix4cd u = Eigen::kroneckerProduct(oracle::random_unitary(2, rng), oracle::random_unitary(2, rng));
      CHECK(std::abs(fidelity(a.transformed(u), b.transformed(u)) - fidelity(a, b)) <= 1e-9);
    }
  }

  TEST_CASE("purity and concurrence of reference states") {
    for (auto b : {BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus}) {
      CHECK(purity(bell_state(b)) == doctest::Approx(1.0));
      CHECK(concurrence(bell_state(b)) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(purity(DensityMatrix4::maximally_mixed()) == doctest::Approx(0.25));
    CHECK(concurrence(DensityMatrix4::maximally_mixed()) == doctest::Approx(0.0));
  }

  TEST_CASE("Werner state concurrence") {
    CHECK(concurrence(werner(0.5)) == doctest::Approx(0.25).epsilon(1e-9));
    for (int k = 0; k <= 20; ++k) {
      const double p = k / 20.0;
      CHECK(concurrence(werner(p)) == doctest::Approx(std::max(0.0, (3.0 * p - 1.0) / 2.0)).epsilon(1e-9));
    }
  }

  TEST_CASE("product states and their mixtures are not entangled") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
      const DensityMatrix4 a = product(oracle::random_qubit(rng), oracle::random_qubit(rng));
      CHECK(concurrence(a) < 1e-7);
      const DensityMatrix4 b = product(oracle::random_qubit(rng), oracle::random_qubit(rng));
      CHECK(concurrence(DensityMatrix4::mix(0.3, a, b)) < 1e-7);
    }
  }

  TEST_CASE("trace distance and nearest Bell state") {
    CHECK(trace_distance(bell_state(BellState::PhiPlus), bell_state(BellState::PhiMinus)) == doctest::Approx(1.0));
    CHECK(trace_distance(werner(0.9), werner(0.9)) < 1e-12);
    const BellMatch m = nearest_bell_state(werner(0.8));
    CHECK(m.state == BellState::PhiMinus);
    CHECK(m.fidelity == doctest::Approx(0.8 + 0.2 / 4.0));
  }

  TEST_CASE("density matrix validation") {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity() / 4.0;
    m(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityMatrix4{m}, InvalidArgument);
    Eigen::Matrix4cd neg = Eigen::Matrix4cd::Zero();
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityMatrix4{neg}, InvalidArgument);
    CHECK_THROWS_AS(DensityMatrix4{Eigen::Matrix4cd::Identity()}, InvalidArgument);
  }

  TEST_CASE("Pauli correlations") {
    CHECK(pauli_correlation(500, 0, 0, 500).value == 1.0);
    CHECK(pauli_correlation(250, 250, 250, 250).value == 0.0);
    CHECK_THROWS_AS(pauli_correlation(0, 0, 0, 0), InvalidArgument);
    // Split giving E = 0.942: N_pp = N_mm = (1 + E)/4 N.
    const double n = 10000.0;
    const double same = (1.0 + 0.942) / 4.0 * n;
    const double diff = (1.0 - 0.942) / 4.0 * n;
    const Correlation c = pauli_correlation(same, diff, diff, same);
    CHECK(c.value == doctest::Approx(0.942));
    CHECK(c.error == doctest::Approx(std::sqrt((1.0 - 0.942 * 0.942) / n)));
  }

  TEST_CASE("witness S") {
    const WitnessResult w = witness_S({Correlation{0.942, 0.008}, Correlation{0.895, 0.010}, Correlation{0.944, 0.008}});
    CHECK(w.s == doctest::Approx(2.781).epsilon(1e-15));
    CHECK(w.sigma == doctest::Approx(std::sqrt(0.008 * 0.008 * 2 + 0.01 * 0.01)));
    CHECK(w.significance == doctest::Approx((w.s - 1.0) / w.sigma));
    CHECK(witness_S({Correlation{-1.0, 0.0}, Correlation{1.0, 0.0}, Correlation{1.0, 0.0}}).s == 3.0);
    CHECK(witness_S({Correlation{0.0, 0.1}, Correlation{0.0, 0.1}, Correlation{1.0, 0.0}}).s == 1.0);
  }
}
