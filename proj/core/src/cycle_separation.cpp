#include "hybridsmooth/cycle_separation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "hybridsmooth/errors.hpp"

namespace hs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

struct Event {
  std::size_t position;
  KernelRole role;
  std::size_t kernel;
};

// Arg-extreme of every run of consecutive firing samples.
std::vector<Event> kernel_events(const std::vector<double>& scores, const SeparationKernel& kernel,
                                 std::size_t kernel_index, double scale_floor) {
  std::vector<double> valid;
  for (double s : scores) {
    if (!std::isnan(s)) valid.push_back(s);
  }
  std::vector<Event> events;
  if (valid.empty()) return events;
  const double center = median(valid);
  std::vector<double> dev(valid.size());
  double largest = 0.0;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    dev[i] = std::abs(valid[i] - center);
    largest = std::max(largest, dev[i]);
  }
  const double scale = std::max(1.4826 * median(dev), scale_floor * largest);
  const double cut = kernel.threshold * scale;

  std::size_t i = 0;
  while (i < scores.size()) {
    const auto excess = [&](std::size_t k) {
      return std::isnan(scores[k]) ? -1.0 : (scores[k] - center) * kernel.direction - cut;
    };
    if (!(excess(i) > 0.0)) {
      ++i;
      continue;
    }
    std::size_t best = i;
    while (i < scores.size() && excess(i) > 0.0) {
      if (excess(i) > excess(best)) best = i;
      ++i;
    }
    events.push_back({best, kernel.role, kernel_index});
  }
  return events;
}

// Collapses events of one role closer than `window`, keeping the one from
// the earliest-listed kernel.
std::vector<Event> merge_events(std::vector<Event> events, std::size_t window) {
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.position < b.position; });
  std::vector<Event> out;
  std::size_t i = 0;
  while (i < events.size()) {
    std::size_t j = i;
    Event keep = events[i];
    while (j + 1 < events.size() && events[j + 1].position - events[j].position <= window) {
      ++j;
      if (events[j].kernel < keep.kernel) keep = events[j];
    }
    out.push_back(keep);
    i = j + 1;
  }
  return out;
}

Cycle make_cycle(const TimeSeries& stream, std::size_t begin, std::size_t end, bool complete, std::size_t number) {
  TimeSeries piece = stream.slice(begin, end);
  const std::string base = stream.label().empty() ? std::string("cycle") : stream.label() + "_cycle";
  TimeSeries labelled(piece.times(), piece.values(), base + std::to_string(number));
  const std::size_t len = labelled.size();
  return Cycle(std::move(labelled), begin, PhaseBounds{0, len}, complete);
}

}  // namespace

void SeparationConfig::validate() const {
  if (filters.empty()) throw InputError("separation needs at least one kernel");
  bool has_start = false;
  for (const auto& k : filters) {
    if (k.weights.empty()) throw InputError("separation kernel '" + k.name + "' is empty");
    for (double w : k.weights) {
      if (!std::isfinite(w)) throw InputError("separation kernel '" + k.name + "' has a non-finite weight");
    }
    if (!std::isfinite(k.threshold) || !std::isfinite(k.direction) || k.direction == 0.0) {
      throw InputError("separation kernel '" + k.name + "' has an invalid threshold or direction");
    }
    has_start = has_start || k.role == KernelRole::start;
  }
  if (!has_start) throw InputError("separation needs at least one start kernel");
  if (!(trim_fraction >= 0.0 && trim_fraction <= 0.25)) throw InputError("trim_fraction must lie in [0, 0.25]");
  if (!(extreme_ratio >= 1.0) || !std::isfinite(extreme_ratio)) throw InputError("extreme_ratio must be >= 1");
  if (!(scale_floor >= 0.0 && scale_floor < 1.0)) throw InputError("scale_floor must lie in [0, 1)");
}

std::size_t SeparationConfig::longest_kernel() const {
  std::size_t out = 0;
  for (const auto& k : filters) out = std::max(out, k.weights.size());
  return out;
}

std::vector<SeparationKernel> default_kernels() {
  constexpr int half = 6;
  SeparationKernel edge{"step_edge", {}, KernelRole::start, 1.0, 4.0};
  for (int k = 0; k < 2 * half; ++k) edge.weights.push_back((k < half ? -1.0 : 1.0) / half);

  SeparationKernel ramp{"positive_ramp", {}, KernelRole::start, 1.0, 4.0};
  double norm = 0.0;
  for (int k = -half; k <= half; ++k) norm += static_cast<double>(k * k);
  for (int k = -half; k <= half; ++k) ramp.weights.push_back(static_cast<double>(k) / norm);

  SeparationKernel spike{"negative_spike", {1.0, -1.0}, KernelRole::end, 1.0, 4.0};
  return {edge, ramp, spike};
}

SeparationConfig default_separation_config() {
  SeparationConfig c;
  c.filters = default_kernels();
  return c;
}

std::vector<double> kernel_scores(const std::vector<double>& values, const SeparationKernel& kernel) {
  const std::size_t n = values.size();
  const std::size_t len = kernel.weights.size();
  const std::size_t anchor = len / 2;
  std::vector<double> out(n, kNaN);
  if (len == 0 || len > n) return out;
  for (std::size_t i = anchor; i + len - anchor <= n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < len; ++k) s += kernel.weights[k] * values[i - anchor + k];
    out[i] = s;
  }
  return out;
}

std::vector<Cycle> separate_cycles(const TimeSeries& stream, const SeparationConfig& config) {
  config.validate();
  if (stream.size() < config.longest_kernel()) throw InputError("stream is shorter than the longest kernel");

  std::vector<Event> starts;
  std::vector<Event> ends;
  for (std::size_t k = 0; k < config.filters.size(); ++k) {
    const auto& kernel = config.filters[k];
    auto events = kernel_events(kernel_scores(stream.values(), kernel), kernel, k, config.scale_floor);
    auto& sink = kernel.role == KernelRole::start ? starts : ends;
    sink.insert(sink.end(), events.begin(), events.end());
  }
  std::vector<Event> events = merge_events(std::move(starts), config.merge_window);
  const auto merged_ends = merge_events(std::move(ends), 1);
  events.insert(events.end(), merged_ends.begin(), merged_ends.end());
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.position < b.position; });

  std::vector<Cycle> cycles;
  const auto emit = [&](std::size_t begin, std::size_t end, bool complete) {
    if (end - begin >= TimeSeries::kMinLength) cycles.push_back(make_cycle(stream, begin, end, complete, cycles.size()));
  };
  bool open = false;
  bool seen_start = false;
  std::size_t begin = 0;
  for (const auto& e : events) {
    if (e.role == KernelRole::start) {
      if (!open) {
        open = true;
        begin = e.position;
      }
      seen_start = true;
    } else if (open) {
      if (e.position > begin) {
        emit(begin, e.position, true);
        open = false;
      }
    } else if (!seen_start && cycles.empty()) {
      emit(0, e.position, false);
    }
  }
  if (open) emit(begin, stream.size(), false);
  return cycles;
}

std::vector<Cycle> separate_by_state(const TimeSeries& stream, const std::vector<bool>& on) {
  if (on.size() != stream.size()) throw InputError("on/off column length does not match the stream");
  std::vector<Cycle> cycles;
  std::size_t i = 0;
  while (i < on.size()) {
    if (!on[i]) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    while (i < on.size() && on[i]) ++i;
    const bool complete = begin > 0 && i < on.size();
    if (i - begin >= TimeSeries::kMinLength) cycles.push_back(make_cycle(stream, begin, i, complete, cycles.size()));
  }
  return cycles;
}

Cycle trim_cycle(const Cycle& cycle, const SeparationConfig& config) {
  config.validate();
  if (cycle.phase.length() < 10) throw InputError("cycle is too short to trim (needs at least 10 samples)");
  const auto& y = cycle.series.values();
  PhaseBounds phase = cycle.phase;

  for (;;) {
    const std::size_t m = phase.length();
    std::vector<double> diffs(m - 1);
    for (std::size_t k = 0; k + 1 < m; ++k) diffs[k] = std::abs(y[phase.start + k + 1] - y[phase.start + k]);
    const auto top = static_cast<std::size_t>(std::floor(config.trim_fraction * static_cast<double>(diffs.size())));
    if (top == 0) break;
    std::vector<double> sorted = diffs;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double rank_cut = sorted[top - 1];
    const double ratio_cut = config.extreme_ratio * median(diffs);
    const auto extreme = [&](double d) { return d > ratio_cut && d >= rank_cut; };

    std::size_t lead = 0;
    while (lead < diffs.size() && extreme(diffs[lead])) ++lead;
    std::size_t trail = 0;
    while (trail < diffs.size() - lead && extreme(diffs[diffs.size() - 1 - trail])) ++trail;
    if (lead == 0 && trail == 0) break;
    if (lead + trail + TimeSeries::kMinLength > m) {
      throw InputError("cycle has fewer than 4 samples left after trimming");
    }
    phase.start += lead;
    phase.end -= trail;
  }
  return Cycle(cycle.series, cycle.source_offset, phase, cycle.complete);
}

SyntheticStream synthetic_stream(const SyntheticStreamConfig& c, Random& rng) {
  if (c.cycles == 0 || c.cycle_length < c.warmup_length + c.cooldown_length + 2) {
    throw InputError("synthetic stream: cycle too short for its warm-up and cool-down");
  }
  SyntheticStream out{TimeSeries::from_values({0, 0, 0, 0}), {}, {}};
  std::vector<double> values;
  const auto idle = [&] {
    for (std::size_t i = 0; i < c.idle_length; ++i) values.push_back(c.baseline);
  };
  const double running_steps = static_cast<double>(c.cycle_length - c.warmup_length - c.cooldown_length - 1);
  for (std::size_t k = 0; k < c.cycles; ++k) {
    idle();
    const std::size_t start = values.size();
    double level = c.baseline + c.jump;
    values.push_back(level);
    for (std::size_t i = 0; i < c.warmup_length; ++i) {
      level += c.warmup_rise / static_cast<double>(c.warmup_length);
      values.push_back(level);
    }
    const std::size_t run_begin = values.size() - 1;
    for (std::size_t i = 0; i < static_cast<std::size_t>(running_steps); ++i) {
      level += c.running_rise / running_steps;
      values.push_back(level);
    }
    const std::size_t run_end = values.size();
    for (std::size_t i = 0; i < c.cooldown_length; ++i) {
      level -= c.cooldown_drop / static_cast<double>(c.cooldown_length);
      values.push_back(level);
    }
    out.cycles.push_back({start, values.size()});
    out.running.push_back({run_begin, run_end});
  }
  if (c.trailing_idle) idle();
  for (double& v : values) v += c.sigma * rng.normal();
  out.stream = TimeSeries::from_values(std::move(values), "synthetic");
  return out;
}

}  // namespace hs
