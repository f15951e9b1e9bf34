#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hybridsmooth/anomaly_basis.hpp"
#include "hybridsmooth/bhm.hpp"

namespace hs {

/// Summary of one step coefficient.
struct CoefficientSummary {
  Eigen::Index column = 0;  ///< column of the step basis
  Eigen::Index index = 0;   ///< sample index where the new level starts
  double time = 0.0;        ///< that sample's time in original units
  double estimate = 0.0;    ///< gamma_hat, or the posterior mean
  double lower = 0.0;       ///< interval endpoints (bayes only)
  double upper = 0.0;
  bool flagged = false;
};

/// Outcome of one analysis, serializable as the CLI report.
struct DetectionReport {
  std::string method;
  double threshold = 0.0;
  std::optional<double> level;  ///< credible level, bayes only
  std::vector<CoefficientSummary> coefficients;
  std::vector<std::pair<std::string, double>> penalties;
  std::vector<std::pair<std::string, double>> diagnostics;
  bool converged = true;
  std::optional<double> runtime_seconds;
  std::string config_json;  ///< resolved configuration, raw JSON; empty for none

  /// Sorted, unique sample indices of flagged coefficients.
  [[nodiscard]] std::vector<Eigen::Index> flagged_indices() const;
  [[nodiscard]] std::vector<double> flagged_times() const;
};

/// Flags column j iff |gamma_j| > max(threshold, active tolerance).
/// `times` are the original sample times (length n).
DetectionReport detect_hybrid(const Eigen::VectorXd& gamma, const StepBasis& basis, const Eigen::VectorXd& times,
                              double threshold);

/// Flags column j iff the central `level` interval of the pooled gamma_j
/// draws excludes 0 and |posterior mean| > threshold.
DetectionReport detect_bayes(const Eigen::MatrixXd& gamma_draws, const StepBasis& basis, const Eigen::VectorXd& times,
                             double threshold = 0.15, double level = 0.95);
DetectionReport detect_bayes(const PosteriorSamples& samples, const StepBasis& basis, const Eigen::VectorXd& times,
                             double threshold = 0.15, double level = 0.95);

/// Report as pretty-printed JSON with 17-significant-digit numbers.
std::string report_to_json(const DetectionReport& report);

/// index,time,estimate,lower,upper,flagged rows for every coefficient.
void write_interval_csv(const DetectionReport& report, std::ostream& out);

}  // namespace hs
