#pragma once

#include <optional>

#include <Eigen/Core>

#include "hybridsmooth/anomaly_basis.hpp"
#include "hybridsmooth/spline_gp.hpp"

namespace hs {

/// Symmetric PSD square root W of I - phi S(omega) phi'.
struct Whitener {
  Eigen::MatrixXd matrix;
  double omega = 0.0;
};

/// Eigendecomposes I - phi S phi'; eigenvalues in (-1e-10, 0) are clamped to
/// zero, anything more negative throws NumericalError.
Whitener whitener(const SplineDesign& design, double omega);

/// (|z| - alpha)_+ sign(z), elementwise.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& z, double alpha);

/// Gram form of a least-squares design: X'X, X'y, y'y and the top
/// eigenvalue of X'X. FISTA only ever touches the data through these.
struct LassoGram {
  Eigen::MatrixXd gram;
  Eigen::VectorXd xty;
  double yty = 0.0;
  double lipschitz = 0.0;

  [[nodiscard]] Eigen::Index dim() const { return xty.size(); }
};

LassoGram lasso_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// ||y - X gamma||^2 + lambda ||gamma||_1.
double lasso_objective(const LassoGram& problem, double lambda, const Eigen::VectorXd& gamma);

/// Smallest lambda with gamma = 0 optimal: 2 ||X'y||_inf.
double kkt_zero_threshold(const LassoGram& problem);

struct FistaOptions {
  double tol = 1e-4;     ///< max |gamma_{k+1} - gamma_k|
  int max_iter = 20000;
};

struct FistaResult {
  Eigen::VectorXd gamma;
  int iterations = 0;
  bool converged = false;
};

/// Accelerated proximal gradient for ||y - X gamma||^2 + lambda ||gamma||_1:
///   z = gamma - tau X'(X gamma - y),  q = soft(z, lambda tau / 2),
///   s' = (1 + sqrt(1 + 4 s^2)) / 2,   gamma = q + (s - 1)/s' (q - q_prev),
/// with tau = 1 / lambda_max(X'X). Returns the thresholded iterate, so
/// exact zeros survive. Non-convergence is reported, not thrown.
FistaResult fista(const LassoGram& problem, double lambda, const Eigen::VectorXd& gamma0,
                  const FistaOptions& options = {});
FistaResult fista(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                  const Eigen::VectorXd& gamma0, const FistaOptions& options = {});

/// Joint L2/L1 decomposition of a series for one (lambda, omega) pair.
struct HybridFit {
  Eigen::VectorXd gamma_hat;
  Eigen::VectorXd c_hat;
  Eigen::VectorXd trend;
  Eigen::VectorXd anomaly;
  Eigen::VectorXd residual;
  double lambda = 0.0;
  double omega = 0.0;
  double rmse = 0.0;
  double edf_total = 0.0;
  Eigen::Index n_active = 0;
  int iterations = 0;
  bool converged = false;
};

/// |gamma_j| above this counts as active.
inline constexpr double kActiveTolerance = 1e-10;

Eigen::Index count_active(const Eigen::VectorXd& gamma);

/// ||y - (phi c + Psi gamma)||^2 + lambda ||gamma||_1 + omega c'Rc.
double hybrid_objective(const Eigen::VectorXd& y, const SplineDesign& design, const StepBasis& basis,
                        const Eigen::VectorXd& c, const Eigen::VectorXd& gamma, double lambda, double omega);

/// Whitened-LASSO solver for a fixed series, design and basis.
///
/// Precomputes the rotation of y and Psi into the penalty eigenbasis once so
/// that each omega costs one O(n^3) Gram product and each lambda only FISTA
/// iterations.
class HybridProblem {
 public:
  HybridProblem(Eigen::VectorXd y, const SplineDesign& design, const StepBasis& basis);

  /// Whitened Gram form for this omega: X = W Psi, y* = W y.
  [[nodiscard]] LassoGram reduced(double omega) const;

  /// Solves at (lambda, omega). `reduced_problem` must come from
  /// reduced(omega); `gamma0` defaults to zero.
  [[nodiscard]] HybridFit solve(const LassoGram& reduced_problem, double lambda, double omega,
                                const FistaOptions& options = {},
                                const std::optional<Eigen::VectorXd>& gamma0 = std::nullopt) const;

  /// c_hat = S(omega) phi'(y - Psi gamma), assembled into a full fit.
  [[nodiscard]] HybridFit back_substitute(const Eigen::VectorXd& gamma, double lambda, double omega) const;

  [[nodiscard]] const Eigen::VectorXd& y() const { return y_; }
  [[nodiscard]] const SplineDesign& design() const { return *design_; }
  [[nodiscard]] const StepBasis& basis() const { return *basis_; }

 private:
  Eigen::VectorXd y_;
  const SplineDesign* design_;
  const StepBasis* basis_;
  Eigen::MatrixXd rotated_basis_;  // V' Psi
  Eigen::VectorXd rotated_y_;      // V' y
};

/// Solves the joint problem at (lambda, omega): gamma_hat from FISTA on the
/// whitened LASSO, c_hat by back-substitution.
HybridFit hybrid_fit(const Eigen::VectorXd& y, const SplineDesign& design, const StepBasis& basis,
                     double lambda, double omega, const FistaOptions& options = {});

}  // namespace hs
