#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "hybridsmooth/random.hpp"
#include "hybridsmooth/simulation.hpp"
#include "hybridsmooth/spline_gp.hpp"
#include "hybridsmooth/timeseries.hpp"

namespace hs::testing {

/// Reference cycle: default trend, unit step at sample 150, noise sd 0.1.
inline TimeSeries reference_cycle(std::uint64_t seed = 7, double size = 1.0, double sigma = 0.1) {
  Random rng(seed);
  return synth_cycle(reference_trend(), size, 150, sigma, rng);
}

/// Design on the cycle's standardized times.
inline SplineDesign unit_design(const TimeSeries& ts) {
  return build_design(standardize_times(ts).series.times_vector());
}

}  // namespace hs::testing
