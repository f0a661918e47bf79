#include <cmath>

#include "epsim/analysis.hpp"
#include "epsim/error.hpp"
#include "epsim/random.hpp"

namespace epsim {

BootstrapResult bootstrap_errors(const Pipeline& pipeline, std::span<const double> counts, int resamples,
                                 std::uint64_t seed) {
  if (resamples < kMinBootstrapResamples) throw InvalidArgument("bootstrap needs at least 100 resamples");
  BootstrapResult out;
  out.resamples = resamples;
  out.estimate = pipeline(counts);
  const std::size_t dim = out.estimate.size();

  std::vector<std::vector<double>> samples;
  samples.reserve(static_cast<std::size_t>(resamples));
  std::vector<double> drawn(counts.size());
  for (int i = 0; i < resamples; ++i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    for (std::size_t k = 0; k < counts.size(); ++k) drawn[k] = poisson_draw(rng, counts[k]);
    try {
      std::vector<double> v = pipeline(drawn);
      if (v.size() != dim) throw InvalidArgument("pipeline changed its output size");
      samples.push_back(std::move(v));
    } catch (const std::exception&) {
      ++out.failures;
    }
  }

  out.mean.assign(dim, 0.0);
  out.error.assign(dim, 0.0);
  const auto n = static_cast<double>(samples.size());
  if (samples.empty()) return out;
  for (const auto& v : samples) {
    for (std::size_t d = 0; d < dim; ++d) out.mean[d] += v[d];
  }
  for (double& m : out.mean) m /= n;
  if (samples.size() > 1) {
    for (const auto& v : samples) {
      for (std::size_t d = 0; d < dim; ++d) out.error[d] += (v[d] - out.mean[d]) * (v[d] - out.mean[d]);
    }
    for (double& e : out.error) e = std::sqrt(e / (n - 1.0));
  }
  return out;
}

}  // namespace epsim
