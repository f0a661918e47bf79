#include <doctest.h>

#include "epsim/analysis.hpp"
#include "epsim/error.hpp"
#include "oracles.hpp"

using namespace epsim;

namespace {

std::vector<TomographyCount> forward(const DensityMatrix4& rho, double n_per_setting,
                                     const std::vector<TomographySetting>& settings = full_tomography_settings()) {
  std::vector<TomographyCount> out;
  for (const auto& s : settings) out.push_back({s, n_per_setting * setting_probability(rho, s)});
  return out;
}

void check_physical(const DensityMatrix4& rho) {
  const Eigen::Matrix4cd& m = rho.matrix();
  CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(std::abs(m.trace() - 1.0) <= 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
  CHECK(es.eigenvalues().minCoeff() >= -1e-9);
}

}  // namespace

TEST_SUITE("tomography") {
  TEST_CASE("setting lists") {
    const auto full = full_tomography_settings();
    CHECK(full.size() == 36);
    CHECK(informationally_complete(full));
    const auto minimal = minimal_tomography_settings();
    CHECK(minimal.size() == 16);
    CHECK(informationally_complete(minimal));
    const std::vector<TomographySetting> z_only{{PolState::H, PolState::H}, {PolState::H, PolState::V},
                                               {PolState::V, PolState::H}, {PolState::V, PolState::V}};
    CHECK_FALSE(informationally_complete(z_only));
  }

  TEST_CASE("projector probabilities") {
    const DensityMatrix4 phi_minus = bell_state(BellState::PhiMinus);
    CHECK(setting_probability(phi_minus, {PolState::H, PolState::H}) == doctest::Approx(0.5));
    CHECK(setting_probability(phi_minus, {PolState::H, PolState::V}) == doctest::Approx(0.0));
    CHECK(setting_probability(phi_minus, {PolState::D, PolState::A}) == doctest::Approx(0.5));
    CHECK(setting_probability(phi_minus, {PolState::R, PolState::R}) == doctest::Approx(0.5));
    const Eigen::Matrix4cd p = setting_projector({PolState::D, PolState::L});
    CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("ideal Bell counts reconstruct the Bell state") {
    for (auto b : {BellState::PhiMinus, BellState::PhiPlus, BellState::PsiPlus}) {
      const TomographyResult r = tomography_mle(forward(bell_state(b), 1e6));
      CHECK(r.converged);
      CHECK(fidelity(r.rho, bell_state(b)) >= 0.999);
      check_physical(r.rho);
    }
  }

  TEST_CASE("maximally mixed counts") {
    const TomographyResult r = tomography_mle(forward(DensityMatrix4::maximally_mixed(), 1e6));
    CHECK(purity(r.rho) == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(trace_distance(r.rho, DensityMatrix4::maximally_mixed()) < 1e-3);
  }

  TEST_CASE("random states round-trip with the minimal setting list") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 10; ++i) {
      const DensityMatrix4 rho(oracle::random_density(rng, 1 + i % 4));
      const TomographyResult r = tomography_mle(forward(rho, 1e6, minimal_tomography_settings()));
      CHECK(trace_distance(r.rho, rho) <= 0.01);
    }
  }

  TEST_CASE("adversarial counts still give a physical state") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      std::vector<TomographyCount> counts;
      for (const auto& s : full_tomography_settings()) {
        const double x = u(rng);
        counts.push_back({s, x < 0.3 ? 0.0 : std::floor(1e4 * x * x * x)});
      }
      check_physical(tomography_mle(counts).rho);
    }
    std::vector<TomographyCount> spike;
    for (const auto& s : full_tomography_settings()) spike.push_back({s, 0.0});
    spike[7].counts = 1.0;
    check_physical(tomography_mle(spike).rho);
  }

  TEST_CASE("preconditions") {
    std::vector<TomographyCount> zeros;
    for (const auto& s : full_tomography_settings()) zeros.push_back({s, 0.0});
    CHECK_THROWS_AS(tomography_mle(zeros), InvalidArgument);
    std::vector<TomographyCount> incomplete{{{PolState::H, PolState::H}, 10.0}, {{PolState::V, PolState::V}, 10.0}};
    CHECK_THROWS_AS(tomography_mle(incomplete), InvalidArgument);
    auto negative = forward(bell_state(BellState::PhiMinus), 100.0);
    negative[0].counts = -1.0;
    CHECK_THROWS_AS(tomography_mle(negative), InvalidArgument);
  }

  TEST_CASE("iteration cap raises the flag") {
    MleOptions opt;
    opt.max_iterations = 1;
    std::mt19937_64 rng(6);
    const DensityMatrix4 rho(oracle::random_density(rng));
    const TomographyResult r = tomography_mle(forward(rho, 1e4), opt);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 1);
    check_physical(r.rho);
  }
}
