#include <doctest.h>

#include <cmath>

#include "epsim/analysis.hpp"
#include "epsim/detection.hpp"
#include "epsim/error.hpp"
#include "epsim/random.hpp"

using namespace epsim;

namespace {

CountRecord record(double c, double a) {
  CountRecord r;
  r.duration_s = 1.0;
  r.coincidence_window_ns = 1.0;
  r.coincidences = c;
  r.accidentals_estimate = a;
  return r;
}

const OutcomeProbabilities kPair{0.5, 1.0, 1.0};

}  // namespace

TEST_SUITE("detection") {
  TEST_CASE("accidental rate") {
    CHECK(accidental_rate(0.0, 0.0, 1.0) == 0.0);
    CHECK(accidental_rate(26000.0, 26000.0, 1.0) == doctest::Approx(0.676));
    CHECK(accidental_rate(26000.0, 26000.0, 2.0) == doctest::Approx(2.0 * accidental_rate(26000.0, 26000.0, 1.0)));
    CHECK_THROWS_AS(accidental_rate(-1.0, 1.0, 1.0), InvalidArgument);
  }

  TEST_CASE("signal to noise ratio") {
    CHECK(*snr(record(141.0 * 3.0, 3.0)) == doctest::Approx(140.0));
    CHECK(*snr(record(7.0, 7.0)) == 0.0);
    CHECK_FALSE(snr(record(10.0, 0.0)).has_value());
  }

  TEST_CASE("accidental subtraction") {
    const NetCounts a = subtract_accidentals(record(100.0, 20.0));
    CHECK(a.net == 80.0);
    CHECK(a.error == doctest::Approx(std::sqrt(120.0)));
    CHECK_FALSE(a.underflow);
    const NetCounts b = subtract_accidentals(record(50.0, 0.0));
    CHECK(b.net == 50.0);
    CHECK(b.error == doctest::Approx(std::sqrt(50.0)));
    const NetCounts c = subtract_accidentals(record(5.0, 9.0));
    CHECK(c.net == 0.0);
    CHECK(c.underflow);
  }

  TEST_CASE("dead-time throughput") {
    CHECK(dead_time_throughput(0.0, 10.0) == 1.0);
    CHECK(dead_time_throughput(26000.0, 10.0) == doctest::Approx(1.0 / 1.26));
    CHECK(dead_time_throughput(26000.0, 0.0) == 1.0);
  }

  TEST_CASE("expected rates follow the closed form") {
    NoiseParams n;
    n.pair_rate_hz = 1e5;
    n.transmission_per_arm = 0.5;
    n.coincidence_window_ns = 2.0;
    DetectorModel d;
    d.dark_rate_hz = 10.0;
    d.dead_time_us = 1.0;
    const ExpectedRates r = expected_rates(kPair, n, d, d);
    const double incident = 1e5 * 0.5 * 0.25 * 1.0 + 10.0;
    const double thr = 1.0 / (1.0 + incident * 1e-6);
    CHECK(r.singles_1 == doctest::Approx(incident * thr));
    CHECK(r.true_coincidences == doctest::Approx(1e5 * 0.5 * 0.0625 * 0.25 * thr * thr));
    CHECK(r.accidentals == doctest::Approx(incident * thr * incident * thr * 2e-9));
  }

  TEST_CASE("gated detector counts only inside its gates") {
    NoiseParams n;
    n.coincidence_window_ns = 5.0;
    DetectorModel free_running;
    DetectorModel gated;
    gated.mode = DetectorMode::Gated;
    gated.gate_width_ns = 2.0;
    const ExpectedRates r = expected_rates(kPair, n, free_running, gated);
    CHECK(r.duty_1 == 1.0);
    CHECK(r.duty_2 < 1.0);
    CHECK(r.window_ns == 2.0);
    CHECK(r.singles_2 < r.singles_1);
    gated.gate_width_ns = 0.0;
    CHECK_THROWS_AS(gated.validate(), InvalidArgument);
  }

  TEST_CASE("zero efficiency leaves dark counts and accidentals only") {
    NoiseParams n;
    DetectorModel d;
    d.efficiency = 0.0;
    const ExpectedRates r = expected_rates(kPair, n, d, d);
    CHECK(r.true_coincidences == 0.0);
    CHECK(r.singles_1 == doctest::Approx(d.dark_rate_hz / (1.0 + d.dark_rate_hz * 1e-5)));
    const CountRecord rec = simulate_counts(kPair, n, d, d, 10.0, 3);
    CHECK(rec.coincidences <= 5.0);
  }

  TEST_CASE("expected coincidences never decrease with efficiency") {
    NoiseParams n;
    n.pair_rate_hz = 1e6;
    double prev = -1.0;
    for (int k = 0; k <= 100; ++k) {
      DetectorModel d;
      d.efficiency = k / 100.0;
      const double c = expected_rates(kPair, n, d, d).true_coincidences;
      CHECK(c >= prev);
      prev = c;
    }
  }

  TEST_CASE("seeded determinism") {
    NoiseParams n;
    DetectorModel d;
    const CountRecord a = simulate_counts(kPair, n, d, d, 1.0, 1234);
    const CountRecord b = simulate_counts(kPair, n, d, d, 1.0, 1234);
    CHECK(a == b);
    CHECK_FALSE(a == simulate_counts(kPair, n, d, d, 1.0, 1235));
  }

  TEST_CASE("sampled coincidences are unbiased") {
    NoiseParams n;
    n.pair_rate_hz = 2e5;
    n.transmission_per_arm = 0.1;
    DetectorModel d;
    const ExpectedRates r = expected_rates(kPair, n, d, d);
    const double duration = 2.0;
    const double mean = (r.true_coincidences + r.accidentals) * duration;
    double sum = 0.0;
    const int reps = 1000;
    for (int i = 0; i < reps; ++i) sum += simulate_counts(kPair, n, d, d, duration, 1000 + i).coincidences;
    const double se = std::sqrt(mean / reps);
    CHECK(std::abs(sum / reps - mean) < 5.0 * se);
  }

  TEST_CASE("subtracting a constant floor restores unit visibility") {
    // Ideal fringe peaking at 2e4 counts on top of a floor A, Poisson sampled.
    const double floor = 3000.0;
    const double peak = 20000.0;
    std::mt19937_64 rng(77);
    FringeDataset data{"11", {}};
    for (int i = 0; i < 41; ++i) {
      const double power = 20.0 * i;
      const double signal = peak * 0.5 * (1.0 - std::cos(2.0 * M_PI * power / 400.0));
      CountRecord r = record(0.0, floor);
      r.coincidences = poisson_draw(rng, signal + floor);
      data.points.push_back({power, r});
    }
    const FringeFit fit = fit_fringe(data);
    CHECK(fit.net.amplitude > 0.0);
    const double v = fit.net.amplitude / fit.net.offset;
    CHECK(std::abs(v - 1.0) <= 3.0 * fit.net.visibility_error);
    CHECK(fit.raw.visibility < 0.9);
  }

  TEST_CASE("CSV rows round-trip exactly") {
    CountRecord r;
    r.duration_s = 10.0;
    r.coincidence_window_ns = 0.078;
    r.singles_1 = 260123.0;
    r.singles_2 = 12.0;
    r.coincidences = 101.0;
    r.accidentals_estimate = 0.1 + 0.2;
    r.accidental_excess = false;
    const std::string row = to_csv_row(r);
    CHECK(count_record_from_csv(row) == r);
    r.accidentals_estimate = 200.0;
    r.accidental_excess = true;
    CHECK(count_record_from_csv(to_csv_row(r)) == r);
    CHECK(count_record_csv_header() ==
          "duration_s,coincidence_window_ns,singles_1,singles_2,coincidences,accidentals,flags");
    CHECK_THROWS_AS(count_record_from_csv("1,2,3"), InvalidArgument);
    CHECK_THROWS_AS(count_record_from_csv("1,2,x,4,5,6,none"), InvalidArgument);
  }
}
