#pragma once

// Two-detector coincidence scheme: expected rates, Poisson-sampled count
// records, accidental estimation and subtraction.

#include <cstdint>
#include <optional>
#include <string>

namespace epsim {

enum class DetectorMode { FreeRunning, Gated };

struct DetectorModel {
  double efficiency = 0.25;
  double dark_rate_hz = 100.0;
  double dead_time_us = 10.0;
  DetectorMode mode = DetectorMode::FreeRunning;
  double gate_width_ns = 0.0;
  double trigger_delay_ns = 0.0;

  void validate() const;
};

struct NoiseParams {
  double pair_rate_hz = 1e6;
  double transmission_per_arm = 1.0;
  double coincidence_window_ns = 1.0;

  void validate() const;
};

// Per generated pair: probability of a photon on each detector arm and of
// both arms together.
struct OutcomeProbabilities {
  double coincidence = 0.0;
  double arm1 = 0.0;
  double arm2 = 0.0;

  void validate() const;
};

struct CountRecord {
  double duration_s = 0.0;
  double coincidence_window_ns = 0.0;
  double singles_1 = 0.0;
  double singles_2 = 0.0;
  double coincidences = 0.0;
  double accidentals_estimate = 0.0;
  // Set when the accidental estimate exceeds the recorded coincidences.
  bool accidental_excess = false;

  friend bool operator==(const CountRecord&, const CountRecord&) = default;
};

// Mean rates (Hz) of the detection model.
struct ExpectedRates {
  double singles_1 = 0.0;
  double singles_2 = 0.0;
  double true_coincidences = 0.0;
  double accidentals = 0.0;
  double throughput_1 = 1.0;
  double throughput_2 = 1.0;
  double duty_1 = 1.0;
  double duty_2 = 1.0;
  double window_ns = 0.0;  // effective coincidence window
};

// Non-paralyzable dead-time throughput 1/(1 + rate * dead_time).
double dead_time_throughput(double incident_rate_hz, double dead_time_us);

double accidental_rate(double s1_hz, double s2_hz, double window_ns);

ExpectedRates expected_rates(const OutcomeProbabilities& p, const NoiseParams& noise, const DetectorModel& d1,
                             const DetectorModel& d2);

// Noise-free record holding the expected counts (no sampling).
CountRecord expected_record(const OutcomeProbabilities& p, const NoiseParams& noise, const DetectorModel& d1,
                            const DetectorModel& d2, double duration_s);

// Poisson-sampled record; reproducible for a given seed.
CountRecord simulate_counts(const OutcomeProbabilities& p, const NoiseParams& noise, const DetectorModel& d1,
                            const DetectorModel& d2, double duration_s, std::uint64_t seed);

// (coincidences - accidentals) / accidentals; nullopt when accidentals are 0.
std::optional<double> snr(const CountRecord& r);

struct NetCounts {
  double net = 0.0;
  double error = 0.0;
  bool underflow = false;  // accidentals exceeded coincidences, net clamped to 0
};

NetCounts subtract_accidentals(const CountRecord& r);

std::string count_record_csv_header();
std::string to_csv_row(const CountRecord& r);
// Parses the columns written by to_csv_row. Throws InvalidArgument.
CountRecord count_record_from_csv(const std::string& row);

}  // namespace epsim
