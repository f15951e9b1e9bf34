#pragma once

#include <string_view>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace hs {

enum class JitterLog { warn, info };

/// Cholesky factorization of a symmetric positive (semi)definite matrix.
///
/// If the plain factorization fails, a diagonal jitter of
/// 1e-10 * trace / n is added once and the event is logged; a second
/// failure throws NumericalError. `jitter` reports what was added.
struct SpdFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;

  [[nodiscard]] Eigen::Index size() const { return llt.rows(); }
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return llt.solve(b); }
  [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const { return llt.solve(b); }
};

SpdFactor factor_spd(const Eigen::MatrixXd& m, std::string_view what, JitterLog level = JitterLog::warn);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double top_eigenvalue(const Eigen::MatrixXd& sym, double tol = 1e-8, int max_iter = 10000);

/// Orthonormal basis (n x 2) of the column space of an n x 2 matrix and of
/// its orthogonal complement (n x (n-2)).
struct ColumnSplit {
  Eigen::MatrixXd range;
  Eigen::MatrixXd complement;
};
ColumnSplit split_columns(const Eigen::MatrixXd& x);

}  // namespace hs
