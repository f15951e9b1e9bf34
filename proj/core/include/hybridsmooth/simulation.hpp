#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hybridsmooth/analysis.hpp"
#include "hybridsmooth/random.hpp"
#include "hybridsmooth/timeseries.hpp"

namespace hs {

/// Smooth concave ramp of length n from 0 to `top`: a scaled integrated
/// logistic whose slope decays from its initial value towards zero.
Eigen::VectorXd reference_trend(Eigen::Index n = 300, double top = 8.0);

/// trend + s * size * 1[i >= index] + N(0, sigma^2), s = +1 or -1 by a fair
/// coin drawn before the noise. Times are 0, 1, ..., n-1.
TimeSeries synth_cycle(const Eigen::VectorXd& trend, double size, Eigen::Index index, double sigma, Random& rng);

enum class StudyMethod { hybrid_elbow, hybrid_aicc, bayes };
std::string_view to_string(StudyMethod method);
StudyMethod parse_study_method(std::string_view name);

struct StudyConfig {
  Eigen::VectorXd trend = reference_trend();
  Eigen::Index disturbance_index = 150;
  std::vector<double> sizes{0.05, 0.2, 0.7, 2.0};
  std::vector<double> sigmas{0.02, 0.07, 0.2, 0.5};
  int replicates = 20;
  /// Methods evaluated on the same simulated datasets.
  std::vector<StudyMethod> methods{StudyMethod::hybrid_aicc};
  std::uint64_t seed = 1;
  /// A flag counts as a detection within this many samples of the index.
  Eigen::Index window = 1;
  double hybrid_threshold = 0.0;
  double bayes_threshold = 0.0;
  double level = 0.95;
  HybridSettings hybrid;
  BayesSettings bayes;
  unsigned threads = 1;

  void validate() const;
};

struct SurfaceCell {
  double size = 0.0;
  double sigma = 0.0;
  std::size_t detections = 0;
  std::size_t total = 0;     ///< replicates that produced a result
  std::size_t failures = 0;  ///< replicates lost to numerical failure

  [[nodiscard]] double probability() const {
    return total == 0 ? 0.0 : static_cast<double>(detections) / static_cast<double>(total);
  }
};

/// Detection frequencies, size-major: cell(is, ig) = cells[is * sigmas.size() + ig].
struct DetectionSurface {
  StudyMethod method = StudyMethod::hybrid_aicc;
  std::vector<double> sizes;
  std::vector<double> sigmas;
  std::vector<SurfaceCell> cells;
  std::vector<double> contour_levels{0.1, 0.5, 0.9};

  [[nodiscard]] const SurfaceCell& cell(std::size_t size_index, std::size_t sigma_index) const {
    return cells[size_index * sigmas.size() + sigma_index];
  }
};

/// Replicate r of grid cell k uses derive_seed(seed, k, r); every method
/// sees the same datasets. Results do not depend on the thread count.
std::vector<DetectionSurface> detection_surfaces(const StudyConfig& config);
DetectionSurface detection_surface(const StudyConfig& config);

/// Whether a report flags the disturbance: a flagged index within `window`.
bool detects(const std::vector<Eigen::Index>& flagged, Eigen::Index index, Eigen::Index window);

/// size,sigma,p,n_detect,n_total
void write_surface_csv(const DetectionSurface& surface, std::ostream& out);

/// Contour segments of the probability surface at its levels, by marching
/// squares over the (size, sigma) grid.
std::string surface_contours_json(const DetectionSurface& surface);

}  // namespace hs
