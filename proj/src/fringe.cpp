#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "epsim/analysis.hpp"
#include "epsim/error.hpp"

namespace epsim {

void FringeDataset::validate() const {
  if (points.size() < kMinPoints) throw InvalidArgument("fringe dataset needs at least 6 points");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].power_mw > points[i - 1].power_mw)) throw InvalidArgument("powers must be strictly increasing");
  }
}

bool FringeFit::flagged() const {
  return !raw.converged || !net.converged || raw.degenerate || net.degenerate || raw.visibility_clamped ||
         net.visibility_clamped;
}

namespace {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

struct Problem {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> w;  // 1 / sigma
};

// Parameters (offset, c, s, k): y = o + c cos(kx) + s sin(kx).
double chi2(const Problem& pb, const Vec4& p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < pb.x.size(); ++i) {
    const double f = p[0] + p[1] * std::cos(p[3] * pb.x[i]) + p[2] * std::sin(p[3] * pb.x[i]);
    const double r = (pb.y[i] - f) * pb.w[i];
    acc += r * r;
  }
  return acc;
}

void normal_equations(const Problem& pb, const Vec4& p, Mat4& jtj, Vec4& jtr) {
  jtj.setZero();
  jtr.setZero();
  for (std::size_t i = 0; i < pb.x.size(); ++i) {
    const double cx = std::cos(p[3] * pb.x[i]);
    const double sx = std::sin(p[3] * pb.x[i]);
    const double f = p[0] + p[1] * cx + p[2] * sx;
    Vec4 j(1.0, cx, sx, pb.x[i] * (-p[1] * sx + p[2] * cx));
    j *= pb.w[i];
    jtj += j * j.transpose();
    jtr += j * ((pb.y[i] - f) * pb.w[i]);
  }
}

// Best (o, c, s) for fixed k, and its chi2.
std::pair<Eigen::Vector3d, double> linear_fit(const Problem& pb, double k) {
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < pb.x.size(); ++i) {
    Eigen::Vector3d j(1.0, std::cos(k * pb.x[i]), std::sin(k * pb.x[i]));
    j *= pb.w[i];
    a += j * j.transpose();
    b += j * (pb.y[i] * pb.w[i]);
  }
  const Eigen::Vector3d sol = a.completeOrthogonalDecomposition().solve(b);
  return {sol, chi2(pb, Vec4(sol[0], sol[1], sol[2], k))};
}

Eigen::Matrix3d linear_covariance(const Problem& pb, double k) {
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < pb.x.size(); ++i) {
    Eigen::Vector3d j(1.0, std::cos(k * pb.x[i]), std::sin(k * pb.x[i]));
    j *= pb.w[i];
    a += j * j.transpose();
  }
  return a.completeOrthogonalDecomposition().pseudoInverse();
}

}  // namespace

SinusoidFit fit_sinusoid(std::span<const double> x, std::span<const double> y, std::span<const double> sigma,
                         const FitOptions& opt) {
  if (x.size() != y.size() || x.size() != sigma.size()) throw InvalidArgument("fit inputs differ in length");
  if (x.size() < 4) throw InvalidArgument("fewer points than fit parameters");
  if (!(opt.period_seed_mw > 0.0)) throw InvalidArgument("period seed must be positive");

  Problem pb;
  pb.x.assign(x.begin(), x.end());
  pb.y.assign(y.begin(), y.end());
  double mean_var = 0.0;
  for (double s : sigma) mean_var += s * s;
  mean_var /= static_cast<double>(sigma.size());
  const double var_floor = 1e-3 * mean_var;
  for (double s : sigma) pb.w.push_back(mean_var > 0.0 ? 1.0 / std::sqrt(std::max(s * s, var_floor)) : 1.0);

  // Coarse scan over the period around the calibration seed.
  const double k_seed = 2.0 * std::numbers::pi / opt.period_seed_mw;
  const double f = std::clamp(opt.period_search_fraction, 0.0, 0.9);
  const int n_grid = std::max(opt.grid_points, 1);
  double best_chi2 = std::numeric_limits<double>::infinity();
  Vec4 p(0.0, 0.0, 0.0, k_seed);
  for (int g = 0; g < n_grid; ++g) {
    const double t = n_grid == 1 ? 0.5 : static_cast<double>(g) / (n_grid - 1);
    const double period = opt.period_seed_mw * (1.0 - f + 2.0 * f * t);
    const double k = 2.0 * std::numbers::pi / period;
    const auto [lin, c2] = linear_fit(pb, k);
    if (c2 < best_chi2) {
      best_chi2 = c2;
      p = Vec4(lin[0], lin[1], lin[2], k);
    }
  }

  SinusoidFit fit;
  const Eigen::Matrix3d lin_cov = linear_covariance(pb, p[3]);
  const double a_lin = std::hypot(p[1], p[2]);
  const double a_lin_err =
      a_lin > 0.0 ? std::sqrt(std::max(0.0, (p[1] * p[1] * lin_cov(1, 1) + p[2] * p[2] * lin_cov(2, 2) +
                                             2.0 * p[1] * p[2] * lin_cov(1, 2)) /
                                                (a_lin * a_lin)))
                  : std::sqrt(std::max(lin_cov(1, 1), 0.0));
  fit.degenerate = !(a_lin > 3.0 * a_lin_err) || a_lin <= 1e-9 * std::abs(p[0]);

  Mat4 cov = Mat4::Zero();
  if (fit.degenerate) {
    // Period is unconstrained by flat data: keep the scan's value, linear errors only.
    cov.topLeftCorner<3, 3>() = lin_cov;
    fit.converged = true;
  } else {
    double lambda = 1e-3;
    double c2 = chi2(pb, p);
    const double scale = [&] {
      double s = 0.0;
      for (std::size_t i = 0; i < pb.y.size(); ++i) s += (pb.y[i] * pb.w[i]) * (pb.y[i] * pb.w[i]);
      return s;
    }();
    Mat4 jtj;
    Vec4 jtr;
    for (int it = 0; it < opt.max_iterations; ++it) {
      fit.iterations = it + 1;
      normal_equations(pb, p, jtj, jtr);
      Mat4 damped = jtj;
      const double max_diag = jtj.diagonal().maxCoeff();
      for (int d = 0; d < 4; ++d) damped(d, d) += lambda * std::max(jtj(d, d), 1e-12 * max_diag);
      const Vec4 step = damped.ldlt().solve(jtr);
      const Vec4 trial = p + step;
      const double c2_trial = chi2(pb, trial);
      if (c2_trial <= c2) {
        const double drop = c2 - c2_trial;
        p = trial;
        c2 = c2_trial;
        lambda = std::max(lambda * 0.1, 1e-12);
        const bool tiny_step = step.cwiseAbs().maxCoeff() <= 1e-13 * (p.cwiseAbs().maxCoeff() + 1e-300);
        if (drop <= 1e-13 * c2 + 1e-28 * scale || tiny_step) {
          fit.converged = true;
          break;
        }
      } else {
        lambda *= 10.0;
        if (lambda > 1e12) {
          fit.converged = true;  // no downhill direction left
          break;
        }
      }
    }
    normal_equations(pb, p, jtj, jtr);
    cov = jtj.completeOrthogonalDecomposition().pseudoInverse();
  }

  const double o = p[0];
  const double c = p[1];
  const double s = p[2];
  const double a = std::hypot(c, s);
  fit.offset = o;
  fit.amplitude = a;
  fit.period = 2.0 * std::numbers::pi / p[3];
  fit.phase0 = a > 0.0 ? std::atan2(-s, c) : 0.0;
  fit.chi2 = chi2(pb, p);

  auto propagate = [&](const Vec4& grad) { return std::sqrt(std::max(0.0, grad.dot(cov * grad))); };
  fit.offset_error = std::sqrt(std::max(cov(0, 0), 0.0));
  if (a > 0.0) {
    fit.amplitude_error = propagate(Vec4(0.0, c / a, s / a, 0.0));
    fit.phase0_error = propagate(Vec4(0.0, s / (a * a), -c / (a * a), 0.0));
  } else {
    fit.amplitude_error = std::sqrt(std::max(cov(1, 1), 0.0));
  }
  fit.period_error = fit.degenerate ? 0.0 : propagate(Vec4(0.0, 0.0, 0.0, -2.0 * std::numbers::pi / (p[3] * p[3])));

  double v = o > 0.0 ? a / o : 0.0;
  if (o > 0.0 && a > 0.0) fit.visibility_error = propagate(Vec4(-a / (o * o), c / (a * o), s / (a * o), 0.0));
  if (!(o > 0.0) || v > 1.0 + 1e-9) fit.visibility_clamped = true;
  fit.visibility = std::clamp(v, 0.0, 1.0);
  return fit;
}

FringeFit fit_fringe(const FringeDataset& data, const FitOptions& opt) {
  data.validate();
  std::vector<double> x;
  std::vector<double> raw;
  std::vector<double> raw_err;
  std::vector<double> net;
  std::vector<double> net_err;
  for (const auto& pt : data.points) {
    x.push_back(pt.power_mw);
    raw.push_back(pt.record.coincidences);
    raw_err.push_back(std::sqrt(std::max(pt.record.coincidences, 0.0)));
    const NetCounts n = subtract_accidentals(pt.record);
    net.push_back(n.net);
    net_err.push_back(n.error);
  }
  FringeFit out;
  out.label = data.label;
  out.raw = fit_sinusoid(x, raw, raw_err, opt);
  out.net = fit_sinusoid(x, net, net_err, opt);
  return out;
}

}  // namespace epsim
