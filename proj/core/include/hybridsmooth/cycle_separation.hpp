#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hybridsmooth/random.hpp"
#include "hybridsmooth/timeseries.hpp"

namespace hs {

enum class KernelRole { start, end };

/// Short filter slid over the stream. The score at sample i is
/// sum_k weights[k] * y[i - anchor + k] with anchor = weights.size() / 2.
/// A kernel fires where (score - median) * direction exceeds
/// threshold * robust scale of the score.
struct SeparationKernel {
  std::string name;
  std::vector<double> weights;
  KernelRole role = KernelRole::start;
  double direction = 1.0;
  double threshold = 4.0;
};

struct SeparationConfig {
  std::vector<SeparationKernel> filters;
  /// Largest share of first differences treated as extreme when trimming.
  double trim_fraction = 0.15;
  /// A difference is extreme only above this multiple of the median |dy|.
  double extreme_ratio = 3.0;
  /// Floor on the robust score scale as a share of the largest deviation.
  double scale_floor = 0.05;
  /// Start events closer than this many samples are one event.
  std::size_t merge_window = 6;

  void validate() const;
  [[nodiscard]] std::size_t longest_kernel() const;
};

/// Step edge (start), positive ramp (start) and negative spike (end).
std::vector<SeparationKernel> default_kernels();
SeparationConfig default_separation_config();

/// Per-sample score of one kernel; NaN where the kernel does not fit.
std::vector<double> kernel_scores(const std::vector<double>& values, const SeparationKernel& kernel);

/// Cuts a stream into cycles where start and end events alternate. A leading
/// end yields an incomplete cycle from sample 0, an unmatched start an
/// incomplete cycle to the stream end. Spans shorter than four samples are
/// dropped. Every cycle's phase covers its whole series.
std::vector<Cycle> separate_cycles(const TimeSeries& stream, const SeparationConfig& config);

/// Cycles are maximal runs of `on`; runs touching either stream end are
/// incomplete.
std::vector<Cycle> separate_by_state(const TimeSeries& stream, const std::vector<bool>& on);

/// Narrows the phase by removing end runs of extreme first differences,
/// repeated until none remain. Requires a phase of at least 10 samples and
/// throws InputError if fewer than 4 would remain.
Cycle trim_cycle(const Cycle& cycle, const SeparationConfig& config);

struct SyntheticStreamConfig {
  std::size_t cycles = 5;
  std::size_t idle_length = 20;
  std::size_t cycle_length = 80;
  std::size_t warmup_length = 4;
  std::size_t cooldown_length = 4;
  double baseline = 0.0;
  double jump = 2.0;
  double warmup_rise = 1.0;
  double running_rise = 3.0;
  double cooldown_drop = 1.0;
  double sigma = 0.02;
  bool trailing_idle = true;
};

/// Sawtooth stream with known structure: idle baseline, jump at start-up,
/// steep warm-up, gentle running ramp, steep cool-down, reset to baseline.
struct SyntheticStream {
  TimeSeries stream;
  std::vector<PhaseBounds> cycles;   ///< [start-up, reset) in stream indices
  std::vector<PhaseBounds> running;  ///< running phase in stream indices
};

SyntheticStream synthetic_stream(const SyntheticStreamConfig& config, Random& rng);

}  // namespace hs
