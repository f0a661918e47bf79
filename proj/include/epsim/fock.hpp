#pragma once

// Few-photon states over labeled optical modes and their exact evolution
// through passive linear-optical unitaries.

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "epsim/density_matrix.hpp"
#include "epsim/polarization.hpp"

namespace epsim {

using Complex = std::complex<double>;

struct ModeLabel {
  int path = 0;
  Polarization polarization = Polarization::H;

  friend bool operator==(const ModeLabel&, const ModeLabel&) = default;
};

// Ordered list of unique mode labels.
class ModeSet {
 public:
  explicit ModeSet(std::vector<ModeLabel> labels);

  // (0,H), (0,V), (1,H), (1,V), ... : path-major, M = 2 * paths.
  static ModeSet dual_polarization(int paths);

  std::size_t size() const noexcept { return labels_.size(); }
  const ModeLabel& operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<ModeLabel>& labels() const noexcept { return labels_; }

  std::optional<std::size_t> find(const ModeLabel& label) const;
  // Throws InvalidArgument for an unknown label.
  std::size_t index_of(const ModeLabel& label) const;
  bool has_path(int path) const;
  int path_count() const;

  friend bool operator==(const ModeSet&, const ModeSet&) = default;

 private:
  std::vector<ModeLabel> labels_;
};

// Photons per mode. Ordered lexicographically so it can key a std::map.
struct OccupationPattern {
  std::vector<int> counts;

  int total() const;
  std::size_t size() const noexcept { return counts.size(); }

  friend bool operator==(const OccupationPattern&, const OccupationPattern&) = default;
  friend auto operator<=>(const OccupationPattern&, const OccupationPattern&) = default;
};

inline constexpr int kDefaultMaxPhotons = 4;
inline constexpr double kPruneThreshold = 1e-15;
inline constexpr double kNormSlack = 1e-9;
inline constexpr double kUnitaryTol = 1e-10;

// Sparse superposition of occupation patterns. Immutable once built;
// terms with |amplitude| < kPruneThreshold are never stored.
class FockVector {
 public:
  using Terms = std::map<OccupationPattern, Complex>;

  FockVector(ModeSet modes, Terms terms, int max_photons = kDefaultMaxPhotons);

  const ModeSet& modes() const noexcept { return modes_; }
  const Terms& terms() const noexcept { return terms_; }
  int max_photons() const noexcept { return max_photons_; }

  double norm_squared() const;
  Complex amplitude(const OccupationPattern& p) const;

  // Same support, amplitudes scaled so the norm is 1. Throws on a zero vector.
  FockVector normalized() const;

 private:
  ModeSet modes_;
  Terms terms_;
  int max_photons_;
};

// Passive mode transformation; column j is the image of a_j†.
class ModeUnitary {
 public:
  // Throws NotUnitary if ||U†U - I||_max > tol.
  ModeUnitary(ModeSet modes, Eigen::MatrixXcd matrix, double tol = kUnitaryTol);

  static ModeUnitary identity(const ModeSet& modes);

  const ModeSet& modes() const noexcept { return modes_; }
  const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }

  // this applied after `first`: (this ∘ first).
  ModeUnitary after(const ModeUnitary& first) const;

 private:
  ModeSet modes_;
  Eigen::MatrixXcd matrix_;
};

double unitarity_defect(const Eigen::MatrixXcd& u);

FockVector make_fock_state(const ModeSet& modes, const OccupationPattern& pattern,
                           int max_photons = kDefaultMaxPhotons);

// Multi-photon evolution: a_j† -> Σ_k U_kj a_k†.
FockVector apply_unitary(const FockVector& state, const ModeUnitary& u);

double outcome_probability(const FockVector& state, const OccupationPattern& pattern);

using PatternPredicate = std::function<bool(const OccupationPattern&)>;

struct PostSelection {
  std::optional<FockVector> state;  // renormalized; empty when nothing survives
  double probability = 0.0;
  bool empty() const noexcept { return !state.has_value(); }
};

PostSelection post_select(const FockVector& state, const PatternPredicate& keep);

// Predicate: exactly one photon in each of the listed paths and none elsewhere.
PatternPredicate one_photon_per_path(const ModeSet& modes, std::vector<int> paths);

// Number of photons on `path` summed over polarizations.
int photons_on_path(const ModeSet& modes, const OccupationPattern& p, int path);

// Two paths (0, 1), each carrying exactly one photon in every term.
// Output basis {HH, HV, VH, VV}; first letter is path 0.
DensityMatrix4 reduce_to_polarization_qubits(const FockVector& state);
Eigen::Vector4cd polarization_qubit_vector(const FockVector& state);

}  // namespace epsim
