#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Core>

#include "hybridsmooth/anomaly_basis.hpp"
#include "hybridsmooth/bhm.hpp"
#include "hybridsmooth/penalty_select.hpp"
#include "hybridsmooth/spline_gp.hpp"

namespace hs {

struct HybridSettings {
  std::size_t omega_points = 25;
  std::size_t lambda_points = 25;
  BasisVariant basis = BasisVariant::forward;
  GridOptions grid;
};

/// Grid search over the default penalty grids plus both selections and
/// the fits at the selected cells.
struct HybridAnalysis {
  PenaltyGrid grid;
  Selection elbow;
  Selection aicc;
  HybridFit elbow_fit;
  HybridFit aicc_fit;
};

HybridAnalysis analyze_hybrid(const Eigen::VectorXd& y, const SplineDesign& design, const StepBasis& basis,
                              const HybridSettings& settings = {});

/// Gamma priors anchored at the AICc fit of a hybrid analysis. Falls back
/// to the defaults when the fit leaves no residual degrees of freedom.
Priors hybrid_anchored_priors(const HybridAnalysis& hybrid);

struct BayesSettings {
  BasisVariant basis = BasisVariant::centered;
  ChainConfig chains;
  double delta = 1e-8;
  bool orthogonalize = true;
  /// Anchor the priors on a hybrid AICc fit run on the same series.
  bool anchor_priors = true;
  /// Explicit priors; override anchoring when set.
  std::optional<Priors> priors;
  HybridSettings anchor;
};

struct BayesAnalysis {
  Priors priors;
  PosteriorSamples samples;
};

/// Runs the sampler on y. `basis` must match settings.basis.
BayesAnalysis analyze_bayes(const Eigen::VectorXd& y, const SplineDesign& design, const StepBasis& basis,
                            const BayesSettings& settings = {});

}  // namespace hs
