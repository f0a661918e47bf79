#include "epsim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "epsim/error.hpp"

namespace epsim {

// --- ModeSet -----------------------------------------------------------------

ModeSet::ModeSet(std::vector<ModeLabel> labels) : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].path < 0) throw InvalidArgument("negative path index");
    for (std::size_t j = 0; j < i; ++j) {
      if (labels_[i] == labels_[j]) throw InvalidArgument("duplicate mode label");
    }
  }
}

ModeSet ModeSet::dual_polarization(int paths) {
  if (paths <= 0) throw InvalidArgument("path count must be positive");
  std::vector<ModeLabel> labels;
  for (int p = 0; p < paths; ++p) {
    labels.push_back({p, Polarization::H});
    labels.push_back({p, Polarization::V});
  }
  return ModeSet(std::move(labels));
}

std::optional<std::size_t> ModeSet::find(const ModeLabel& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t ModeSet::index_of(const ModeLabel& label) const {
  if (auto i = find(label)) return *i;
  throw InvalidArgument("unknown mode (path " + std::to_string(label.path) + ", " +
                        std::string(to_string(label.polarization)) + ")");
}

bool ModeSet::has_path(int path) const {
  return std::any_of(labels_.begin(), labels_.end(),
                     [path](const ModeLabel& l) { return l.path == path; });
}

int ModeSet::path_count() const {
  int max_path = -1;
  for (const auto& l : labels_) max_path = std::max(max_path, l.path);
  return max_path + 1;
}

int OccupationPattern::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

// --- FockVector --------------------------------------------------------------

FockVector::FockVector(ModeSet modes, Terms terms, int max_photons)
    : modes_(std::move(modes)), max_photons_(max_photons) {
  if (max_photons < 0) throw InvalidArgument("negative photon budget");
  for (auto& [pattern, amp] : terms) {
    if (pattern.size() != modes_.size()) throw InvalidArgument("pattern/mode-set dimension mismatch");
    if (std::any_of(pattern.counts.begin(), pattern.counts.end(), [](int c) { return c < 0; })) {
      throw InvalidArgument("negative occupation");
    }
    if (pattern.total() > max_photons_) throw InvalidArgument("photon budget exceeded");
    if (std::abs(amp) >= kPruneThreshold) terms_.emplace(pattern, amp);
  }
  if (norm_squared() > 1.0 + kNormSlack) throw InvalidArgument("state norm exceeds 1");
}

double FockVector::norm_squared() const {
  double s = 0.0;
  for (const auto& [p, a] : terms_) s += std::norm(a);
  return s;
}

Complex FockVector::amplitude(const OccupationPattern& p) const {
  if (p.size() != modes_.size()) throw InvalidArgument("pattern/mode-set dimension mismatch");
  auto it = terms_.find(p);
  return it == terms_.end() ? Complex{} : it->second;
}

FockVector FockVector::normalized() const {
  const double n = std::sqrt(norm_squared());
  if (n == 0.0) throw InvalidArgument("cannot normalize the zero vector");
  Terms scaled;
  for (const auto& [p, a] : terms_) scaled.emplace(p, a / n);
  return FockVector(modes_, std::move(scaled), max_photons_);
}

// --- ModeUnitary -------------------------------------------------------------

double unitarity_defect(const Eigen::MatrixXcd& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  const Eigen::MatrixXcd d = u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
  return d.size() == 0 ? 0.0 : d.cwiseAbs().maxCoeff();
}

ModeUnitary::ModeUnitary(ModeSet modes, Eigen::MatrixXcd matrix, double tol)
    : modes_(std::move(modes)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != static_cast<Eigen::Index>(modes_.size()) || matrix_.cols() != matrix_.rows()) {
    throw InvalidArgument("unitary dimension does not match mode set");
  }
  const double defect = unitarity_defect(matrix_);
  if (!(defect <= tol)) {
    throw NotUnitary("matrix is not unitary (defect " + std::to_string(defect) + ")");
  }
}

ModeUnitary ModeUnitary::identity(const ModeSet& modes) {
  const auto m = static_cast<Eigen::Index>(modes.size());
  return ModeUnitary(modes, Eigen::MatrixXcd::Identity(m, m));
}

ModeUnitary ModeUnitary::after(const ModeUnitary& first) const {
  if (!(modes_ == first.modes_)) throw InvalidArgument("mode set mismatch");
  return ModeUnitary(modes_, matrix_ * first.matrix_);
}

// --- Operations --------------------------------------------------------------

FockVector make_fock_state(const ModeSet& modes, const OccupationPattern& pattern, int max_photons) {
  return FockVector(modes, {{pattern, Complex{1.0, 0.0}}}, max_photons);
}

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Polynomial in creation operators, keyed by monomial exponents.
using Polynomial = std::map<OccupationPattern, Complex>;

Polynomial multiply_by_linear_form(const Polynomial& poly, const Eigen::VectorXcd& column) {
  Polynomial out;
  for (const auto& [mono, coef] : poly) {
    for (Eigen::Index k = 0; k < column.size(); ++k) {
      if (column[k] == Complex{}) continue;
      OccupationPattern next = mono;
      ++next.counts[static_cast<std::size_t>(k)];
      out[next] += coef * column[k];
    }
  }
  return out;
}

}  // namespace

FockVector apply_unitary(const FockVector& state, const ModeUnitary& u) {
  if (!(state.modes() == u.modes())) throw InvalidArgument("mode set mismatch");
  const std::size_t m = state.modes().size();
  const Eigen::MatrixXcd& mat = u.matrix();

  std::map<OccupationPattern, Complex> out;
  for (const auto& [pattern, amp] : state.terms()) {
    // |n> = Π_j (a_j†)^{n_j} / sqrt(n_j!) |0>
    Polynomial poly{{OccupationPattern{std::vector<int>(m, 0)}, Complex{1.0, 0.0}}};
    double in_norm = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      const int nj = pattern.counts[j];
      in_norm *= factorial(nj);
      for (int r = 0; r < nj; ++r) poly = multiply_by_linear_form(poly, mat.col(static_cast<Eigen::Index>(j)));
    }
    in_norm = std::sqrt(in_norm);
    // (a_k†)^{m_k} |0> = sqrt(m_k!) |m_k>
    for (const auto& [mono, coef] : poly) {
      double out_norm = 1.0;
      for (int c : mono.counts) out_norm *= factorial(c);
      out[mono] += amp * coef * std::sqrt(out_norm) / in_norm;
    }
  }
  return FockVector(state.modes(), std::move(out), state.max_photons());
}

double outcome_probability(const FockVector& state, const OccupationPattern& pattern) {
  return std::norm(state.amplitude(pattern));
}

PostSelection post_select(const FockVector& state, const PatternPredicate& keep) {
  FockVector::Terms kept;
  double p = 0.0;
  for (const auto& [pattern, amp] : state.terms()) {
    if (keep(pattern)) {
      kept.emplace(pattern, amp);
      p += std::norm(amp);
    }
  }
  PostSelection result;
  result.probability = p;
  if (p > 0.0) {
    result.state = FockVector(state.modes(), std::move(kept), state.max_photons()).normalized();
  }
  return result;
}

int photons_on_path(const ModeSet& modes, const OccupationPattern& p, int path) {
  if (p.size() != modes.size()) throw InvalidArgument("pattern/mode-set dimension mismatch");
  int n = 0;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].path == path) n += p.counts[i];
  }
  return n;
}

PatternPredicate one_photon_per_path(const ModeSet& modes, std::vector<int> paths) {
  return [modes, paths = std::move(paths)](const OccupationPattern& p) {
    for (int path : paths) {
      if (photons_on_path(modes, p, path) != 1) return false;
    }
    return p.total() == static_cast<int>(paths.size());
  };
}

Eigen::Vector4cd polarization_qubit_vector(const FockVector& state) {
  const ModeSet& modes = state.modes();
  if (!modes.has_path(0) || !modes.has_path(1) || modes.path_count() != 2) {
    throw InvalidArgument("polarization reduction needs exactly paths 0 and 1");
  }
  Eigen::Vector4cd psi = Eigen::Vector4cd::Zero();
  for (const auto& [pattern, amp] : state.terms()) {
    if (pattern.total() != 2 || photons_on_path(modes, pattern, 0) != 1 ||
        photons_on_path(modes, pattern, 1) != 1) {
      throw InvalidArgument("term violates one-photon-per-path");
    }
    int index = 0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      if (pattern.counts[i] == 0) continue;
      const int bit = modes[i].polarization == Polarization::V ? 1 : 0;
      index += modes[i].path == 0 ? 2 * bit : bit;
    }
    psi[index] += amp;
  }
  return psi;
}

DensityMatrix4 reduce_to_polarization_qubits(const FockVector& state) {
  const Eigen::Vector4cd psi = polarization_qubit_vector(state);
  if (psi.squaredNorm() == 0.0) throw InvalidArgument("empty state");
  return DensityMatrix4::from_pure(psi);
}

}  // namespace epsim
