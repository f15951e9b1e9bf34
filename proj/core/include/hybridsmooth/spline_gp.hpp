#pragma once

#include <Eigen/Core>

namespace hs {

/// Cubic smoothing-spline design on standardized times.
///
/// The basis is the natural cubic spline cardinal basis with a knot at every
/// observation, so phi is the identity and the coefficients are the fitted
/// values themselves; `roughness` is the Gram matrix of second derivatives,
/// R[j,k] = integral of phi_j'' phi_k''. `trend` is the n x 2 matrix [1, t]
/// and `covariance` the matching Gaussian-process covariance K built from
/// gp_kernel.
///
/// Because phi = I the roughness matrix is also the value-space penalty, and
/// its eigendecomposition (cached in `penalty_vectors` / `penalty_values`,
/// ascending, with an exact two-dimensional null space spanned by the linear
/// functions) diagonalizes every smoother S(omega).
struct SplineDesign {
  Eigen::VectorXd times;
  Eigen::MatrixXd phi;
  Eigen::MatrixXd roughness;
  Eigen::MatrixXd trend;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd penalty_vectors;
  Eigen::VectorXd penalty_values;

  [[nodiscard]] Eigen::Index size() const { return times.size(); }
};

/// Builds the design for strictly increasing times in [0, 1], n >= 4.
SplineDesign build_design(const Eigen::VectorXd& times);

/// Second-order reproducing kernel on [0, 1]: integral over u of
/// (s-u)_+ (t-u)_+, i.e. m^2 (3M - m) / 6 with m = min, M = max.
double gp_kernel(double s, double t);

/// S = (phi' phi + omega R)^{-1} and the hat matrix A = phi S phi'.
struct Smoother {
  Eigen::MatrixXd inverse;
  Eigen::MatrixXd hat;
};

Smoother smoother(const SplineDesign& design, double omega);

/// phi c_hat with c_hat = S(omega) phi' y.
Eigen::VectorXd spline_fit(const Eigen::VectorXd& y, const SplineDesign& design, double omega);

/// Effective degrees of freedom of the spline, tr(phi S phi'), evaluated
/// from the cached penalty spectrum. Lies in (2, n].
double hat_trace(const SplineDesign& design, double omega);

/// The omega whose hat_trace equals `edf`, for 2 < edf < n.
double omega_for_edf(const SplineDesign& design, double edf);

/// Eigenvalues of I - phi S(omega) phi' in the penalty eigenbasis:
/// omega mu / (1 + omega mu).
Eigen::VectorXd residual_spectrum(const SplineDesign& design, double omega);

}  // namespace hs
