#include <cmath>
#include <deque>
#include <limits>

#include "epsim/analysis.hpp"
#include "epsim/error.hpp"

namespace epsim {

std::vector<TomographySetting> full_tomography_settings() {
  std::vector<TomographySetting> out;
  for (PolState a : kAllPolStates) {
    for (PolState b : kAllPolStates) out.push_back({a, b});
  }
  return out;
}

std::vector<TomographySetting> minimal_tomography_settings() {
  using P = PolState;
  return {{P::H, P::H}, {P::H, P::V}, {P::V, P::V}, {P::V, P::H}, {P::R, P::H}, {P::R, P::V},
          {P::D, P::V}, {P::D, P::H}, {P::D, P::R}, {P::D, P::D}, {P::R, P::D}, {P::H, P::D},
          {P::V, P::D}, {P::V, P::L}, {P::H, P::L}, {P::R, P::L}};
}

Eigen::Matrix4cd setting_projector(const TomographySetting& s) {
  Eigen::Vector4cd v;
  const Eigen::Vector2cd a = jones(s.first);
  const Eigen::Vector2cd b = jones(s.second);
  v << a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1];
  return v * v.adjoint();
}

double setting_probability(const DensityMatrix4& rho, const TomographySetting& s) {
  return std::max(0.0, (setting_projector(s) * rho.matrix()).trace().real());
}

namespace {

// Hermitian basis sigma_a (x) sigma_b, a, b in {I, X, Y, Z}.
std::array<Eigen::Matrix4cd, 16> pauli_basis() {
  std::array<Eigen::Matrix2cd, 4> p;
  p[0] = Eigen::Matrix2cd::Identity();
  p[1] << 0, 1, 1, 0;
  p[2] << 0, std::complex<double>(0, -1), std::complex<double>(0, 1), 0;
  p[3] << 1, 0, 0, -1;
  std::array<Eigen::Matrix4cd, 16> out;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      Eigen::Matrix4cd m;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l) m(2 * i + k, 2 * j + l) = p[a](i, j) * p[b](k, l);
      out[4 * a + b] = m;
    }
  }
  return out;
}

Eigen::MatrixXd design_matrix(std::span<const TomographySetting> settings) {
  static const auto basis = pauli_basis();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(settings.size()), 16);
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const Eigen::Matrix4cd proj = setting_projector(settings[k]);
    for (int mu = 0; mu < 16; ++mu) a(static_cast<Eigen::Index>(k), mu) = (proj * basis[mu]).trace().real();
  }
  return a;
}

constexpr int kParams = 16;
using Params = Eigen::Matrix<double, kParams, 1>;

// Lower-triangular L: real diagonal, then (re, im) of each strictly lower entry.
Eigen::Matrix4cd unpack(const Params& x) {
  Eigen::Matrix4cd l = Eigen::Matrix4cd::Zero();
  int idx = 0;
  for (int i = 0; i < 4; ++i) l(i, i) = x[idx++];
  for (int i = 1; i < 4; ++i) {
    for (int j = 0; j < i; ++j) {
      l(i, j) = {x[idx], x[idx + 1]};
      idx += 2;
    }
  }
  return l;
}

Params pack_gradient(const Eigen::Matrix4cd& g) {
  Params x;
  int idx = 0;
  for (int i = 0; i < 4; ++i) x[idx++] = 2.0 * g(i, i).real();
  for (int i = 1; i < 4; ++i) {
    for (int j = 0; j < i; ++j) {
      x[idx++] = 2.0 * g(i, j).real();
      x[idx++] = 2.0 * g(i, j).imag();
    }
  }
  return x;
}

Params pack(const Eigen::Matrix4cd& l) {
  Params x;
  int idx = 0;
  for (int i = 0; i < 4; ++i) x[idx++] = l(i, i).real();
  for (int i = 1; i < 4; ++i) {
    for (int j = 0; j < i; ++j) {
      x[idx++] = l(i, j).real();
      x[idx++] = l(i, j).imag();
    }
  }
  return x;
}

class PoissonObjective {
 public:
  explicit PoissonObjective(std::span<const TomographyCount> counts) {
    for (const auto& c : counts) {
      projectors_.push_back(setting_projector(c.setting));
      n_.push_back(c.counts);
    }
  }

  // sum_k mu_k - n_k log mu_k with mu_k = Tr[P_k L L†]; +inf outside the domain.
  double value(const Params& x, Params* grad) const {
    const Eigen::Matrix4cd l = unpack(x);
    const Eigen::Matrix4cd rho = l * l.adjoint();
    double f = 0.0;
    Eigen::Matrix4cd g = Eigen::Matrix4cd::Zero();
    for (std::size_t k = 0; k < n_.size(); ++k) {
      const double mu = (projectors_[k] * rho).trace().real();
      if (n_[k] > 0.0) {
        if (!(mu > 0.0)) return std::numeric_limits<double>::infinity();
        f += mu - n_[k] * std::log(mu);
        if (grad) g += (1.0 - n_[k] / mu) * projectors_[k];
      } else {
        f += mu;
        if (grad) g += projectors_[k];
      }
    }
    if (grad) *grad = pack_gradient(g * l);
    return f;
  }

 private:
  std::vector<Eigen::Matrix4cd> projectors_;
  std::vector<double> n_;
};

Eigen::Matrix4cd linear_inversion(std::span<const TomographyCount> counts) {
  static const auto basis = pauli_basis();
  std::vector<TomographySetting> settings;
  Eigen::VectorXd n(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t k = 0; k < counts.size(); ++k) {
    settings.push_back(counts[k].setting);
    n[static_cast<Eigen::Index>(k)] = counts[k].counts;
  }
  const Eigen::VectorXd coef = design_matrix(settings).completeOrthogonalDecomposition().solve(n);
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  for (int mu = 0; mu < 16; ++mu) m += coef[mu] * basis[mu];
  m = 0.5 * (m + m.adjoint()).eval();
  return m;
}

}  // namespace

bool informationally_complete(std::span<const TomographySetting> settings) {
  if (settings.size() < 16) return false;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(design_matrix(settings));
  lu.setThreshold(1e-10);
  return lu.rank() == 16;
}

TomographyResult tomography_mle(std::span<const TomographyCount> counts, const MleOptions& opt) {
  std::vector<TomographySetting> settings;
  double total = 0.0;
  for (const auto& c : counts) {
    if (!(c.counts >= 0.0) || !std::isfinite(c.counts)) throw InvalidArgument("tomography counts must be finite and non-negative");
    settings.push_back(c.setting);
    total += c.counts;
  }
  if (!informationally_complete(settings)) throw InvalidArgument("tomography settings are not informationally complete");
  if (!(total > 0.0)) throw InvalidArgument("tomography needs a positive total count");

  // Start from the linear-inversion estimate projected onto PSD matrices.
  Eigen::Matrix4cd m = linear_inversion(counts);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
  double tr = ev.sum();
  if (!(tr > 0.0)) {
    ev.setConstant(1.0);
    tr = 4.0;
  }
  const double scale = total / static_cast<double>(counts.size()) * 4.0;  // typical expected count level
  ev = ev / tr;
  ev.array() += 1e-4;
  ev = ev / ev.sum() * scale;
  m = es.eigenvectors() * ev.cast<std::complex<double>>().asDiagonal() * es.eigenvectors().adjoint();
  m = 0.5 * (m + m.adjoint()).eval();
  Params x = pack(Eigen::LLT<Eigen::Matrix4cd>(m).matrixL().toDenseMatrix());

  const PoissonObjective obj(counts);
  Params g;
  double f = obj.value(x, &g);
  if (!std::isfinite(f)) {
    x = pack(Eigen::Matrix4cd::Identity() * std::sqrt(scale / 4.0));
    f = obj.value(x, &g);
  }

  // L-BFGS with Armijo backtracking.
  constexpr std::size_t kHistory = 10;
  std::deque<std::pair<Params, Params>> history;  // (s, y)
  TomographyResult result;
  int quiet = 0;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    Params q = g;
    std::vector<double> alpha(history.size());
    for (std::size_t i = history.size(); i-- > 0;) {
      const auto& [s, y] = history[i];
      alpha[i] = s.dot(q) / y.dot(s);
      q -= alpha[i] * y;
    }
    if (!history.empty()) {
      const auto& [s, y] = history.back();
      q *= s.dot(y) / y.dot(y);
    } else {
      q *= std::min(1.0, 1e-3 * x.norm() / std::max(g.norm(), 1e-300));
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
      const auto& [s, y] = history[i];
      const double beta = y.dot(q) / y.dot(s);
      q += s * (alpha[i] - beta);
    }
    Params dir = -q;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      history.clear();
      dir = -g * std::min(1.0, 1e-3 * x.norm() / std::max(g.norm(), 1e-300));
      slope = g.dot(dir);
      if (!(slope < 0.0)) {
        result.converged = true;
        break;
      }
    }

    double step = 1.0;
    Params x_new;
    Params g_new;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * dir;
      f_new = obj.value(x_new, &g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No further decrease at machine precision.
      result.converged = true;
      break;
    }
    const Params s = x_new - x;
    const Params y = g_new - g;
    if (s.dot(y) > 1e-300) {
      history.emplace_back(s, y);
      if (history.size() > kHistory) history.pop_front();
    }
    const double change = std::abs(f - f_new) / std::max(std::abs(f_new), 1.0);
    x = x_new;
    f = f_new;
    g = g_new;
    quiet = change < opt.tolerance ? quiet + 1 : 0;
    if (quiet >= 3) {
      result.converged = true;
      ++it;
      break;
    }
  }

  const Eigen::Matrix4cd l = unpack(x);
  Eigen::Matrix4cd rho = l * l.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  result.rho = DensityMatrix4(rho);
  result.neg_log_likelihood = f;
  result.iterations = it;
  return result;
}

}  // namespace epsim
