#include "epsim/detection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "epsim/error.hpp"
#include "epsim/random.hpp"

namespace epsim {

void DetectorModel::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw InvalidArgument("detector efficiency outside [0,1]");
  if (!(dark_rate_hz >= 0.0)) throw InvalidArgument("dark rate must be non-negative");
  if (!(dead_time_us >= 0.0)) throw InvalidArgument("dead time must be non-negative");
  if (mode == DetectorMode::Gated && !(gate_width_ns > 0.0)) throw InvalidArgument("gated mode requires gate_width > 0");
  if (!(trigger_delay_ns >= 0.0)) throw InvalidArgument("trigger delay must be non-negative");
}

void NoiseParams::validate() const {
  if (!(pair_rate_hz >= 0.0) || !std::isfinite(pair_rate_hz)) throw InvalidArgument("pair rate must be non-negative");
  if (!(transmission_per_arm >= 0.0 && transmission_per_arm <= 1.0)) throw InvalidArgument("transmission outside [0,1]");
  if (!(coincidence_window_ns >= 0.0)) throw InvalidArgument("coincidence window must be non-negative");
}

void OutcomeProbabilities::validate() const {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!finite_nonneg(coincidence) || !finite_nonneg(arm1) || !finite_nonneg(arm2)) {
    throw InvalidArgument("outcome probabilities must be finite and non-negative");
  }
  constexpr double slack = 1e-12;
  if (coincidence > 1.0 + slack) throw InvalidArgument("coincidence probability exceeds 1");
  if (arm1 > 2.0 + slack || arm2 > 2.0 + slack) throw InvalidArgument("arm photon number exceeds the pair");
}

double dead_time_throughput(double incident_rate_hz, double dead_time_us) {
  return 1.0 / (1.0 + incident_rate_hz * dead_time_us * 1e-6);
}

double accidental_rate(double s1_hz, double s2_hz, double window_ns) {
  if (s1_hz < 0.0 || s2_hz < 0.0 || window_ns < 0.0) throw InvalidArgument("accidental inputs must be non-negative");
  return s1_hz * s2_hz * window_ns * 1e-9;
}

ExpectedRates expected_rates(const OutcomeProbabilities& p, const NoiseParams& noise, const DetectorModel& d1,
                             const DetectorModel& d2) {
  p.validate();
  noise.validate();
  d1.validate();
  d2.validate();
  const double t = noise.transmission_per_arm;
  const double incident1 = noise.pair_rate_hz * t * d1.efficiency * p.arm1 + d1.dark_rate_hz;
  const double incident2 = noise.pair_rate_hz * t * d2.efficiency * p.arm2 + d2.dark_rate_hz;

  ExpectedRates r;
  // A gated detector is opened by the other detector's clicks.
  auto duty = [](const DetectorModel& d, double trigger_rate) {
    return d.mode == DetectorMode::Gated ? std::min(1.0, trigger_rate * d.gate_width_ns * 1e-9) : 1.0;
  };
  r.duty_1 = duty(d1, incident2);
  r.duty_2 = duty(d2, incident1);
  r.throughput_1 = dead_time_throughput(incident1 * r.duty_1, d1.dead_time_us);
  r.throughput_2 = dead_time_throughput(incident2 * r.duty_2, d2.dead_time_us);
  r.singles_1 = incident1 * r.duty_1 * r.throughput_1;
  r.singles_2 = incident2 * r.duty_2 * r.throughput_2;

  r.window_ns = noise.coincidence_window_ns;
  for (const DetectorModel* d : {&d1, &d2}) {
    if (d->mode == DetectorMode::Gated) r.window_ns = std::min(r.window_ns, d->gate_width_ns);
  }
  r.true_coincidences = noise.pair_rate_hz * p.coincidence * d1.efficiency * d2.efficiency * t * t *
                        r.throughput_1 * r.throughput_2;
  r.accidentals = accidental_rate(incident1 * r.throughput_1, incident2 * r.throughput_2, r.window_ns);
  return r;
}

namespace {

double estimate_accidentals(const ExpectedRates& r, double singles_1, double singles_2, double duration_s) {
  const double s1 = singles_1 / duration_s / r.duty_1;
  const double s2 = singles_2 / duration_s / r.duty_2;
  return accidental_rate(s1, s2, r.window_ns) * duration_s;
}

}  // namespace

CountRecord expected_record(const OutcomeProbabilities& p, const NoiseParams& noise, const DetectorModel& d1,
                            const DetectorModel& d2, double duration_s) {
  if (!(duration_s > 0.0)) throw InvalidArgument("duration must be positive");
  const ExpectedRates r = expected_rates(p, noise, d1, d2);
  CountRecord rec;
  rec.duration_s = duration_s;
  rec.coincidence_window_ns = r.window_ns;
  rec.singles_1 = r.singles_1 * duration_s;
  rec.singles_2 = r.singles_2 * duration_s;
  rec.coincidences = (r.true_coincidences + r.accidentals) * duration_s;
  rec.accidentals_estimate = estimate_accidentals(r, rec.singles_1, rec.singles_2, duration_s);
  rec.accidental_excess = rec.accidentals_estimate > rec.coincidences;
  return rec;
}

CountRecord simulate_counts(const OutcomeProbabilities& p, const NoiseParams& noise, const DetectorModel& d1,
                            const DetectorModel& d2, double duration_s, std::uint64_t seed) {
  if (!(duration_s > 0.0)) throw InvalidArgument("duration must be positive");
  const ExpectedRates r = expected_rates(p, noise, d1, d2);
  Rng rng(seed);
  CountRecord rec;
  rec.duration_s = duration_s;
  rec.coincidence_window_ns = r.window_ns;
  rec.singles_1 = poisson_draw(rng, r.singles_1 * duration_s);
  rec.singles_2 = poisson_draw(rng, r.singles_2 * duration_s);
  rec.coincidences = poisson_draw(rng, (r.true_coincidences + r.accidentals) * duration_s);
  rec.accidentals_estimate = estimate_accidentals(r, rec.singles_1, rec.singles_2, duration_s);
  rec.accidental_excess = rec.accidentals_estimate > rec.coincidences;
  return rec;
}

std::optional<double> snr(const CountRecord& r) {
  if (!(r.accidentals_estimate > 0.0)) return std::nullopt;
  return (r.coincidences - r.accidentals_estimate) / r.accidentals_estimate;
}

NetCounts subtract_accidentals(const CountRecord& r) {
  NetCounts n;
  n.net = r.coincidences - r.accidentals_estimate;
  if (n.net < 0.0) {
    n.net = 0.0;
    n.underflow = true;
  }
  n.error = std::sqrt(std::max(r.coincidences + r.accidentals_estimate, 0.0));
  return n;
}

// --- CSV ---------------------------------------------------------------------

std::string count_record_csv_header() {
  return "duration_s,coincidence_window_ns,singles_1,singles_2,coincidences,accidentals,flags";
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("not a number: '" + s + "'");
  }
  if (used != s.size()) throw InvalidArgument("trailing characters in number: '" + s + "'");
  return v;
}

}  // namespace

std::string to_csv_row(const CountRecord& r) {
  return fmt(r.duration_s) + "," + fmt(r.coincidence_window_ns) + "," + fmt(r.singles_1) + "," + fmt(r.singles_2) +
         "," + fmt(r.coincidences) + "," + fmt(r.accidentals_estimate) + "," +
         (r.accidental_excess ? "accidental_excess" : "none");
}

CountRecord count_record_from_csv(const std::string& row) {
  std::vector<std::string> cols;
  std::stringstream ss(row);
  std::string cell;
  while (std::getline(ss, cell, ',')) cols.push_back(cell);
  if (cols.size() != 7) throw InvalidArgument("count record row needs 7 columns");
  CountRecord r;
  r.duration_s = parse_double(cols[0]);
  r.coincidence_window_ns = parse_double(cols[1]);
  r.singles_1 = parse_double(cols[2]);
  r.singles_2 = parse_double(cols[3]);
  r.coincidences = parse_double(cols[4]);
  r.accidentals_estimate = parse_double(cols[5]);
  if (cols[6] == "accidental_excess") {
    r.accidental_excess = true;
  } else if (cols[6] != "none") {
    throw InvalidArgument("unknown flag '" + cols[6] + "'");
  }
  return r;
}

}  // namespace epsim
