#include "hybridsmooth/anomaly_basis.hpp"

#include <string>

#include "hybridsmooth/errors.hpp"

namespace hs {

std::string_view to_string(BasisVariant variant) {
  return variant == BasisVariant::forward ? "forward" : "centered";
}

BasisVariant parse_basis_variant(std::string_view name) {
  if (name == "forward") return BasisVariant::forward;
  if (name == "centered") return BasisVariant::centered;
  throw InputError("unknown basis variant '" + std::string(name) + "' (expected forward or centered)");
}

Eigen::Index centered_anchor(Eigen::Index n) { return (n + 1) / 2 - 1; }

StepBasis step_basis(Eigen::Index n, BasisVariant variant) {
  if (n < 4) throw InputError("step_basis: need n >= 4, got " + std::to_string(n));
  StepBasis b;
  b.variant = variant;
  b.psi = Eigen::MatrixXd::Zero(n, n - 1);
  b.column_times.resize(static_cast<std::size_t>(n - 1));
  const auto mid = centered_anchor(n);
  for (Eigen::Index j = 0; j < n - 1; ++j) {
    b.column_times[static_cast<std::size_t>(j)] = j + 1;
    if (variant == BasisVariant::centered && j + 1 <= mid) {
      b.psi.col(j).head(j + 1).setOnes();
    } else {
      b.psi.col(j).tail(n - j - 1).setOnes();
    }
  }
  return b;
}

Eigen::VectorXd anomaly_signal(const StepBasis& basis, const Eigen::VectorXd& gamma) {
  if (gamma.size() != basis.cols()) {
    throw InputError("anomaly_signal: gamma has length " + std::to_string(gamma.size()) + ", basis has " +
                     std::to_string(basis.cols()) + " columns");
  }
  // Running sums instead of a dense product: O(n).
  const auto n = basis.rows();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  const auto mid = basis.variant == BasisVariant::centered ? centered_anchor(n) : Eigen::Index{0};
  double acc = 0.0;
  for (Eigen::Index i = mid + 1; i < n; ++i) {  // steps at or right of the anchor
    acc += gamma(i - 1);
    out(i) = acc;
  }
  acc = 0.0;
  for (Eigen::Index i = mid - 1; i >= 0; --i) {  // centered: steps left of the anchor
    acc += gamma(i);
    out(i) = acc;
  }
  return out;
}

}  // namespace hs
