#include "hybridsmooth/hybrid_solver.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "hybridsmooth/errors.hpp"
#include "hybridsmooth/linalg.hpp"

namespace hs {

Whitener whitener(const SplineDesign& design, double omega) {
  const auto s = smoother(design, omega);
  const auto n = design.size();
  const Eigen::MatrixXd residual_op = Eigen::MatrixXd::Identity(n, n) - s.hat;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (residual_op + residual_op.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError("whitener: eigendecomposition failed");
  Eigen::VectorXd values = eig.eigenvalues();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) < -1e-10) {
      throw NumericalError("whitener: I - phi S phi' has eigenvalue " + std::to_string(values(i)));
    }
    values(i) = std::sqrt(std::max(values(i), 0.0));
  }
  return {eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose(), omega};
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& z, double alpha) {
  return (z.array().abs() - alpha).max(0.0) * z.array().sign();
}

LassoGram lasso_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw InputError("lasso: design rows and response length differ");
  LassoGram p;
  p.gram = x.transpose() * x;
  p.xty = x.transpose() * y;
  p.yty = y.squaredNorm();
  p.lipschitz = top_eigenvalue(p.gram);
  return p;
}

double lasso_objective(const LassoGram& problem, double lambda, const Eigen::VectorXd& gamma) {
  const double quad = problem.yty - 2.0 * gamma.dot(problem.xty) + gamma.dot(problem.gram * gamma);
  return std::max(quad, 0.0) + lambda * gamma.lpNorm<1>();
}

double kkt_zero_threshold(const LassoGram& problem) { return 2.0 * problem.xty.lpNorm<Eigen::Infinity>(); }

FistaResult fista(const LassoGram& problem, double lambda, const Eigen::VectorXd& gamma0, const FistaOptions& options) {
  if (!(lambda > 0.0)) throw InputError("fista: lambda must be positive");
  if (!(options.tol > 0.0)) throw InputError("fista: tol must be positive");
  if (gamma0.size() != problem.dim()) throw InputError("fista: initial gamma has the wrong length");
  if (!(problem.lipschitz > 0.0)) throw InputError("fista: design matrix is zero");

  const double tau = 1.0 / problem.lipschitz;
  const double alpha = lambda * tau / 2.0;

  FistaResult r;
  Eigen::VectorXd point = gamma0;  // extrapolated iterate
  Eigen::VectorXd q_prev = gamma0;
  Eigen::VectorXd q(problem.dim());
  double s = 1.0;
  for (int k = 1; k <= options.max_iter; ++k) {
    const Eigen::VectorXd z = point - tau * (problem.gram * point - problem.xty);
    q = soft_threshold(z, alpha);
    const double s_next = (1.0 + std::sqrt(1.0 + 4.0 * s * s)) / 2.0;
    const double change = (q - q_prev).lpNorm<Eigen::Infinity>();
    point = q + ((s - 1.0) / s_next) * (q - q_prev);
    q_prev = q;
    s = s_next;
    r.iterations = k;
    if (change <= options.tol) {
      r.converged = true;
      break;
    }
  }
  r.gamma = std::move(q_prev);
  return r;
}

FistaResult fista(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, const Eigen::VectorXd& gamma0,
                  const FistaOptions& options) {
  return fista(lasso_gram(x, y), lambda, gamma0, options);
}

Eigen::Index count_active(const Eigen::VectorXd& gamma) {
  return (gamma.array().abs() > kActiveTolerance).count();
}

double hybrid_objective(const Eigen::VectorXd& y, const SplineDesign& design, const StepBasis& basis,
                        const Eigen::VectorXd& c, const Eigen::VectorXd& gamma, double lambda, double omega) {
  const Eigen::VectorXd r = y - design.phi * c - anomaly_signal(basis, gamma);
  return r.squaredNorm() + lambda * gamma.lpNorm<1>() + omega * c.dot(design.roughness * c);
}

HybridProblem::HybridProblem(Eigen::VectorXd y, const SplineDesign& design, const StepBasis& basis)
    : y_(std::move(y)), design_(&design), basis_(&basis) {
  if (y_.size() != design.size() || basis.rows() != design.size()) {
    throw InputError("hybrid problem: y, design and basis dimensions disagree");
  }
  rotated_basis_ = design.penalty_vectors.transpose() * basis.psi;
  rotated_y_ = design.penalty_vectors.transpose() * y_;
}

LassoGram HybridProblem::reduced(double omega) const {
  // W^2 = V diag(d) V', so (W Psi)'(W Psi) = (V'Psi)' diag(d) (V'Psi).
  const Eigen::VectorXd d = residual_spectrum(*design_, omega);
  const Eigen::MatrixXd weighted = d.asDiagonal() * rotated_basis_;
  LassoGram p;
  p.gram.resize(rotated_basis_.cols(), rotated_basis_.cols());
  p.gram.noalias() = rotated_basis_.transpose() * weighted;
  p.xty = weighted.transpose() * rotated_y_;
  p.yty = rotated_y_.dot(d.asDiagonal() * rotated_y_);
  p.lipschitz = top_eigenvalue(p.gram);
  return p;
}

HybridFit HybridProblem::back_substitute(const Eigen::VectorXd& gamma, double lambda, double omega) const {
  const auto& v = design_->penalty_vectors;
  const Eigen::ArrayXd shrink = 1.0 / (1.0 + omega * design_->penalty_values.array());

  HybridFit f;
  f.lambda = lambda;
  f.omega = omega;
  f.gamma_hat = gamma;
  f.anomaly = anomaly_signal(*basis_, gamma);
  const Eigen::VectorXd u = y_ - f.anomaly;
  // phi = I, so S(omega) phi' u = V diag(1 / (1 + omega mu)) V' u.
  f.c_hat = v * (shrink * (v.transpose() * u).array()).matrix();
  f.trend = design_->phi * f.c_hat;
  f.residual = y_ - f.trend - f.anomaly;
  f.rmse = std::sqrt(f.residual.squaredNorm() / static_cast<double>(y_.size()));
  f.n_active = count_active(gamma);
  f.edf_total = shrink.sum() + static_cast<double>(f.n_active);
  return f;
}

HybridFit HybridProblem::solve(const LassoGram& reduced_problem, double lambda, double omega,
                               const FistaOptions& options, const std::optional<Eigen::VectorXd>& gamma0) const {
  const Eigen::VectorXd start = gamma0.value_or(Eigen::VectorXd::Zero(basis_->cols()));
  const auto result = fista(reduced_problem, lambda, start, options);
  auto f = back_substitute(result.gamma, lambda, omega);
  f.iterations = result.iterations;
  f.converged = result.converged;
  return f;
}

HybridFit hybrid_fit(const Eigen::VectorXd& y, const SplineDesign& design, const StepBasis& basis, double lambda,
                     double omega, const FistaOptions& options) {
  if (!(omega > 0.0)) throw InputError("hybrid_fit: omega must be positive");
  const HybridProblem problem(y, design, basis);
  return problem.solve(problem.reduced(omega), lambda, omega, options);
}

}  // namespace hs
