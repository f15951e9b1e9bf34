#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace hs {

enum class BasisVariant { forward, centered };

std::string_view to_string(BasisVariant variant);
BasisVariant parse_basis_variant(std::string_view name);

/// Step-function basis for the anomaly signal, n x (n-1).
///
/// Column j carries the step between samples j and j+1, for both variants,
/// and `column_times[j] == j + 1` is the first sample of the new level.
/// forward: column j is zero up to sample j and one afterwards.
/// centered: the level is anchored at the middle sample m = ceil(n/2) - 1
/// (0-based). Steps left of m are ones from sample 0 through j, steps right
/// of m are ones from sample j+1 to the end; the column that would hold the
/// middle sample's own level is dropped because the intercept lives in the
/// trend.
struct StepBasis {
  Eigen::MatrixXd psi;
  BasisVariant variant = BasisVariant::forward;
  std::vector<Eigen::Index> column_times;

  [[nodiscard]] Eigen::Index rows() const { return psi.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return psi.cols(); }
};

StepBasis step_basis(Eigen::Index n, BasisVariant variant);

/// Psi gamma.
Eigen::VectorXd anomaly_signal(const StepBasis& basis, const Eigen::VectorXd& gamma);

/// Index of the middle sample used by the centered variant.
Eigen::Index centered_anchor(Eigen::Index n);

}  // namespace hs
