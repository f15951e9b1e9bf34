#include "hybridsmooth/spline_gp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "hybridsmooth/errors.hpp"
#include "hybridsmooth/linalg.hpp"

namespace hs {

namespace {

// Solves a symmetric tridiagonal system (diag d, off-diagonal e) in place.
void solve_tridiagonal(const Eigen::VectorXd& d, const Eigen::VectorXd& e, Eigen::Ref<Eigen::VectorXd> rhs) {
  const auto m = d.size();
  Eigen::VectorXd c(m);
  double denom = d(0);
  c(0) = m > 1 ? e(0) / denom : 0.0;
  rhs(0) /= denom;
  for (Eigen::Index i = 1; i < m; ++i) {
    denom = d(i) - e(i - 1) * c(i - 1);
    if (i < m - 1) c(i) = e(i) / denom;
    rhs(i) = (rhs(i) - e(i - 1) * rhs(i - 1)) / denom;
  }
  for (Eigen::Index i = m - 2; i >= 0; --i) rhs(i) -= c(i) * rhs(i + 1);
}

void check_times(const Eigen::VectorXd& times) {
  const auto n = times.size();
  if (n < 4) throw InputError("spline design: need n >= 4, got " + std::to_string(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(times(i)) || times(i) < -1e-12 || times(i) > 1.0 + 1e-12) {
      throw InputError("spline design: times must be standardized to [0, 1]");
    }
    if (i > 0 && !(times(i) > times(i - 1))) {
      throw InputError("spline design: duplicate or decreasing time at index " + std::to_string(i));
    }
  }
}

void check_omega(double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw InputError("smoothing penalty omega must be positive and finite");
}

}  // namespace

double gp_kernel(double s, double t) {
  if (!(s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0)) throw InputError("gp_kernel: arguments must lie in [0, 1]");
  const double m = std::min(s, t);
  const double big = std::max(s, t);
  return m * m * (3.0 * big - m) / 6.0;
}

SplineDesign build_design(const Eigen::VectorXd& times) {
  check_times(times);
  const auto n = times.size();
  const auto interior = n - 2;
  const Eigen::VectorXd h = times.tail(n - 1) - times.head(n - 1);

  // Green & Silverman: R = Q T^{-1} Q' with Q (n x n-2) the second-divided-
  // difference operator and T (n-2 x n-2) tridiagonal.
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, interior);
  Eigen::VectorXd t_diag(interior);
  Eigen::VectorXd t_off = Eigen::VectorXd::Zero(std::max<Eigen::Index>(interior - 1, 1));
  for (Eigen::Index j = 0; j < interior; ++j) {
    q(j, j) = 1.0 / h(j);
    q(j + 1, j) = -1.0 / h(j) - 1.0 / h(j + 1);
    q(j + 2, j) = 1.0 / h(j + 1);
    t_diag(j) = (h(j) + h(j + 1)) / 3.0;
    if (j + 1 < interior) t_off(j) = h(j + 1) / 6.0;
  }
  Eigen::MatrixXd t_inv_qt = q.transpose();
  for (Eigen::Index c = 0; c < n; ++c) solve_tridiagonal(t_diag, t_off, t_inv_qt.col(c));

  SplineDesign d;
  d.times = times;
  d.phi = Eigen::MatrixXd::Identity(n, n);
  d.roughness = q * t_inv_qt;
  d.roughness = 0.5 * (d.roughness + d.roughness.transpose()).eval();
  d.trend.resize(n, 2);
  d.trend.col(0).setOnes();
  d.trend.col(1) = times;
  d.covariance.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      d.covariance(i, j) = d.covariance(j, i) = gp_kernel(times(i), times(j));
    }
  }

  // Spectrum of R with the linear null space imposed exactly.
  const auto split = split_columns(d.trend);
  const Eigen::MatrixXd reduced = split.complement.transpose() * d.roughness * split.complement;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (reduced + reduced.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError("spline design: eigendecomposition of R failed");
  d.penalty_vectors.resize(n, n);
  d.penalty_vectors.leftCols(2) = split.range;
  d.penalty_vectors.rightCols(interior) = split.complement * eig.eigenvectors();
  d.penalty_values.resize(n);
  d.penalty_values.head(2).setZero();
  d.penalty_values.tail(interior) = eig.eigenvalues().cwiseMax(0.0);
  return d;
}

Smoother smoother(const SplineDesign& design, double omega) {
  check_omega(omega);
  // phi = I, so S = A = V diag(1 / (1 + omega mu)) V' on the cached spectrum,
  // which keeps the linear null space exact for any omega.
  const Eigen::ArrayXd shrink = 1.0 / (1.0 + omega * design.penalty_values.array());
  const Eigen::MatrixXd& v = design.penalty_vectors;
  Smoother s;
  s.inverse = v * shrink.matrix().asDiagonal() * v.transpose();
  s.inverse = 0.5 * (s.inverse + s.inverse.transpose()).eval();
  s.hat = s.inverse;
  return s;
}

Eigen::VectorXd spline_fit(const Eigen::VectorXd& y, const SplineDesign& design, double omega) {
  check_omega(omega);
  if (y.size() != design.size()) {
    throw InputError("spline_fit: y has length " + std::to_string(y.size()) + ", design has " +
                     std::to_string(design.size()));
  }
  const Eigen::ArrayXd shrink = 1.0 / (1.0 + omega * design.penalty_values.array());
  const Eigen::ArrayXd rotated = design.penalty_vectors.transpose() * y;
  return design.penalty_vectors * (shrink * rotated).matrix();
}

double hat_trace(const SplineDesign& design, double omega) {
  check_omega(omega);
  return (1.0 / (1.0 + omega * design.penalty_values.array())).sum();
}

Eigen::VectorXd residual_spectrum(const SplineDesign& design, double omega) {
  check_omega(omega);
  const Eigen::ArrayXd scaled = omega * design.penalty_values.array();
  return (scaled / (1.0 + scaled)).matrix();
}

double omega_for_edf(const SplineDesign& design, double edf) {
  const double n = static_cast<double>(design.size());
  if (!(edf > 2.0 && edf < n)) throw InputError("omega_for_edf: target must lie strictly between 2 and n");
  // hat_trace is strictly decreasing in omega; bisect on log(omega).
  double lo = -60.0;
  double hi = 60.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hat_trace(design, std::exp(mid)) > edf) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-12) break;
  }
  return std::exp(0.5 * (lo + hi));
}

}  // namespace hs
