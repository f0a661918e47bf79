#include <doctest.h>

#include <numbers>

#include "epsim/components.hpp"
#include "epsim/error.hpp"
#include "oracles.hpp"

using namespace epsim;

namespace {

const ModeSet kModes = ModeSet::dual_polarization(2);
constexpr double kPi = std::numbers::pi;

// Equal up to a global phase.
bool equal_up_to_phase(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, double tol = 1e-12) {
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  a.cwiseAbs().maxCoeff(&r, &c);
  if (std::abs(b(r, c)) < 1e-12) return false;
  const auto phase = a(r, c) / b(r, c);
  return (a - phase * b).cwiseAbs().maxCoeff() < tol;
}

}  // namespace

TEST_SUITE("components") {
  TEST_CASE("thermo-optic calibration") {
    const PhaseShifterCalibration cal;
    CHECK(power_to_phase(0.0, cal) == 0.0);
    CHECK(power_to_phase(400.0, cal) == doctest::Approx(2.0 * kPi));
    CHECK(power_to_phase(200.0, cal) == doctest::Approx(kPi));
    CHECK(phase_to_power(kPi, cal) == doctest::Approx(200.0));
    CHECK(phase_to_power(power_to_phase(123.4, cal), cal) == doctest::Approx(123.4));
    // 10 mA through 75 ohm dissipates 7.5 mW.
    CHECK(current_to_power(10.0, cal) == doctest::Approx(7.5));

    PhaseShifterCalibration shifted = cal;
    shifted.phase_offset_rad = 0.3;
    CHECK(power_to_phase(0.0, shifted) == doctest::Approx(0.3));

    PhaseShifterCalibration bad = cal;
    bad.power_for_2pi_mw = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    CHECK_THROWS_AS(power_to_phase(-1.0, cal), InvalidArgument);
  }

  TEST_CASE("phase is exactly linear in power") {
    PhaseShifterCalibration cal;
    cal.phase_offset_rad = 0.7;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 800.0);
    for (int i = 0; i < 200; ++i) {
      const double a = u(rng);
      const double b = u(rng);
      CHECK(std::abs((power_to_phase(a + b, cal) - power_to_phase(b, cal)) -
                     (power_to_phase(a, cal) - power_to_phase(0.0, cal))) <= 1e-12);
      if (a != b) CHECK((power_to_phase(a, cal) < power_to_phase(b, cal)) == (a < b));
    }
  }

  TEST_CASE("half-wave plate conventions") {
    const Eigen::Matrix2cd h0 = waveplate_jones(WaveplateKind::Half, 0.0);
    CHECK(std::abs(h0(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(h0(1, 1) + 1.0) < 1e-15);
    CHECK(std::abs(h0(0, 1)) < 1e-15);

    const Eigen::Vector2cd d = waveplate_jones(WaveplateKind::Half, 22.5) * jones(PolState::H);
    CHECK(std::abs(std::abs(d.dot(jones(PolState::D))) - 1.0) < 1e-12);
    const Eigen::Vector2cd v = waveplate_jones(WaveplateKind::Half, 45.0) * jones(PolState::H);
    CHECK(std::abs(std::abs(v.dot(jones(PolState::V))) - 1.0) < 1e-12);
    const Eigen::Vector2cd circ = waveplate_jones(WaveplateKind::Quarter, 45.0) * jones(PolState::H);
    CHECK(std::abs(circ[0]) == doctest::Approx(std::abs(circ[1])));
  }

  TEST_CASE("HWP squared is identity up to global phase") {
    for (int k = 0; k < 180; ++k) {
      const double theta = k + 0.37;
      const Eigen::Matrix2cd h = waveplate_jones(WaveplateKind::Half, theta);
      CHECK(equal_up_to_phase(h * h, Eigen::Matrix2cd::Identity()));
      CHECK(unitarity_defect(h) <= 1e-12);
    }
  }

  TEST_CASE("coupler matrix and polarization selectivity") {
    const ModeUnitary c = coupler_unitary(kModes, 0, 1, 0.3);
    const double t = std::sqrt(0.7);
    const double r = std::sqrt(0.3);
    CHECK(std::abs(c.matrix()(0, 0) - t) < 1e-15);
    CHECK(std::abs(c.matrix()(2, 0) - Complex(0.0, r)) < 1e-15);
    CHECK(std::abs(c.matrix()(3, 1) - Complex(0.0, r)) < 1e-15);

    const ModeUnitary h_only = coupler_unitary(kModes, 0, 1, 0.5, Polarization::H);
    CHECK(std::abs(h_only.matrix()(1, 1) - 1.0) < 1e-15);
    CHECK(std::abs(h_only.matrix()(3, 3) - 1.0) < 1e-15);
    CHECK_THROWS_AS(coupler_unitary(kModes, 0, 1, 1.3), InvalidArgument);
    CHECK_THROWS_AS(coupler_unitary(kModes, 0, 0, 0.5), InvalidArgument);
  }

  TEST_CASE("Mach-Zehnder cross probability") {
    for (double phi : {0.0, 0.4, kPi / 2, 2.0, kPi, 5.5}) {
      CircuitSpec spec;
      spec.components = {ComponentSpec::coupler(0, 1, 0.5), ComponentSpec::phase(phi, {1}),
                         ComponentSpec::coupler(0, 1, 0.5)};
      const Eigen::MatrixXcd u = compile_circuit(spec).matrix();
      // 2x2 product by hand: B = [[1, i], [i, 1]]/sqrt2, P = diag(1, e^{i phi}).
      Eigen::Matrix2cd b;
      b << 1.0, Complex(0, 1), Complex(0, 1), 1.0;
      b /= std::sqrt(2.0);
      Eigen::Matrix2cd p = Eigen::Matrix2cd::Identity();
      p(1, 1) = std::polar(1.0, phi);
      const Eigen::Matrix2cd mz = b * p * b;
      CHECK(std::norm(u(2, 0)) == doctest::Approx(std::norm(mz(1, 0))));
      CHECK(std::norm(u(2, 0)) == doctest::Approx(std::pow(std::cos(phi / 2), 2)));
      CHECK(std::norm(u(0, 0)) == doctest::Approx(std::pow(std::sin(phi / 2), 2)));
    }
  }

  TEST_CASE("insensitive coupler commutes with identical waveplates") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ang(0.0, 180.0);
    const Eigen::MatrixXcd c = coupler_unitary(kModes, 0, 1, 0.37).matrix();
    for (int i = 0; i < 20; ++i) {
      const double theta = ang(rng);
      const auto kind = i % 2 == 0 ? WaveplateKind::Half : WaveplateKind::Quarter;
      const Eigen::MatrixXcd w =
          (waveplate_unitary(kModes, kind, theta, 0).after(waveplate_unitary(kModes, kind, theta, 1))).matrix();
      CHECK((c * w - w * c).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("PBS transmits H and reflects V") {
    const Eigen::MatrixXcd u = pbs_unitary(kModes, 0, 1).matrix();
    CHECK(std::abs(u(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(u(2, 2) - 1.0) < 1e-15);
    CHECK(std::norm(u(3, 1)) == doctest::Approx(1.0));
    CHECK(std::norm(u(1, 3)) == doctest::Approx(1.0));
  }

  TEST_CASE("analyzer maps the analyzed state onto H") {
    for (PolState s : kAllPolStates) {
      const Eigen::MatrixXcd u = analyzer_unitary(kModes, s, 1).matrix();
      const Eigen::Vector2cd j = jones(s);
      const Complex to_h = u(2, 2) * j[0] + u(2, 3) * j[1];
      CHECK(std::norm(to_h) == doctest::Approx(1.0));
      const Eigen::Vector2cd o = jones(orthogonal(s));
      CHECK(std::norm(u(2, 2) * o[0] + u(2, 3) * o[1]) < 1e-24);
    }
  }

  TEST_CASE("every compiled component is unitary") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> x(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      CircuitSpec spec;
      spec.components = {ComponentSpec::coupler(0, 1, x(rng)), ComponentSpec::phase(10 * x(rng), {0, 1}),
                         ComponentSpec::hwp(0, 180 * x(rng)), ComponentSpec::qwp(1, 180 * x(rng)),
                         ComponentSpec::pbs(0, 1), ComponentSpec::coupler(0, 1, x(rng), Polarization::V)};
      CHECK(unitarity_defect(compile_circuit(spec).matrix()) <= 1e-10);
    }
  }

  TEST_CASE("circuit compilation errors carry the component index") {
    CHECK(compile_circuit(CircuitSpec{}).matrix().isApprox(Eigen::MatrixXcd::Identity(4, 4)));
    CircuitSpec spec;
    spec.components = {ComponentSpec::hwp(0, 10.0), ComponentSpec::phase(1.0, {0}), ComponentSpec::hwp(3, 5.0)};
    try {
      compile_circuit(spec);
      FAIL("expected ComponentError");
    } catch (const ComponentError& e) {
      CHECK(e.index() == 2);
    }
  }

  TEST_CASE("attenuators act at detection only") {
    CircuitSpec spec;
    spec.components = {ComponentSpec::attenuator(1, 0.8), ComponentSpec::attenuator(1, 0.5)};
    CHECK(compile_circuit(spec).matrix().isApprox(Eigen::MatrixXcd::Identity(4, 4)));
    const auto t = path_transmissions(spec);
    REQUIRE(t.size() == 2);
    CHECK(t[0] == 1.0);
    CHECK(t[1] == doctest::Approx(0.4));
  }

  TEST_CASE("component kinds round-trip through their names") {
    for (auto k : {ComponentKind::Coupler, ComponentKind::PhaseShifter, ComponentKind::Hwp, ComponentKind::Qwp,
                   ComponentKind::Pbs, ComponentKind::Attenuator}) {
      CHECK(component_kind_from_string(to_string(k)) == k);
    }
    CHECK_THROWS_AS(component_kind_from_string("mirror"), InvalidArgument);
  }
}
