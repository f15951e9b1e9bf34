#include "hybridsmooth/linalg.hpp"

#include <cmath>
#include <string>

#include <Eigen/QR>
#include <spdlog/spdlog.h>

#include "hybridsmooth/errors.hpp"

namespace hs {

SpdFactor factor_spd(const Eigen::MatrixXd& m, std::string_view what, JitterLog level) {
  SpdFactor f;
  f.llt.compute(m);
  if (f.llt.info() == Eigen::Success) return f;

  const auto n = m.rows();
  const double trace = m.trace();
  f.jitter = 1e-10 * std::abs(trace) / static_cast<double>(std::max<Eigen::Index>(n, 1));
  if (!(f.jitter > 0.0)) f.jitter = 1e-10;
  if (level == JitterLog::warn) {
    spdlog::warn("{}: Cholesky failed, retrying with diagonal jitter {:.3e}", what, f.jitter);
  } else {
    spdlog::info("{}: Cholesky failed, retrying with diagonal jitter {:.3e}", what, f.jitter);
  }
  Eigen::MatrixXd jittered = m;
  jittered.diagonal().array() += f.jitter;
  f.llt.compute(jittered);
  if (f.llt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + ": matrix is not positive definite even after jitter " +
                         std::to_string(f.jitter));
  }
  return f;
}

double top_eigenvalue(const Eigen::MatrixXd& sym, double tol, int max_iter) {
  const auto n = sym.rows();
  if (n == 0) return 0.0;
  // Deterministic start with energy in every coordinate.
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0);
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd w = sym * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (it > 0 && std::abs(next - estimate) <= tol * std::abs(next)) return next;
    estimate = next;
  }
  return estimate;
}

ColumnSplit split_columns(const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  const auto p = x.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return {q.leftCols(p), q.rightCols(n - p)};
}

}  // namespace hs
