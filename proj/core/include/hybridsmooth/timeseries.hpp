#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace hs {

/// Observation vector with strictly increasing time stamps.
///
/// Immutable once constructed; the constructor enforces the invariants
/// (equal lengths, at least four points, strictly increasing finite times,
/// finite values).
class TimeSeries {
 public:
  static constexpr std::size_t kMinLength = 4;

  TimeSeries(std::vector<double> times, std::vector<double> values, std::string label = {});

  /// Unit-spaced times 0, 1, ..., n-1.
  static TimeSeries from_values(std::vector<double> values, std::string label = {});

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] const std::vector<double>& times() const { return times_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] const std::string& label() const { return label_; }

  [[nodiscard]] Eigen::VectorXd times_vector() const;
  [[nodiscard]] Eigen::VectorXd values_vector() const;

  /// Contiguous sub-series [begin, end).
  [[nodiscard]] TimeSeries slice(std::size_t begin, std::size_t end) const;

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  std::string label_;
};

/// Affine map between original time units and the unit interval.
struct TimeMapping {
  double origin = 0.0;
  double span = 1.0;

  [[nodiscard]] double to_unit(double t) const { return (t - origin) / span; }
  [[nodiscard]] double from_unit(double u) const { return origin + u * span; }
};

struct StandardizedSeries {
  TimeSeries series;
  TimeMapping mapping;
};

/// Maps times affinely onto [0, 1]; values are untouched. Idempotent on
/// input that is already standardized.
StandardizedSeries standardize_times(const TimeSeries& ts);

/// Numeric table read from a comma-delimited file. An optional single
/// header row is detected (first row with any non-numeric field).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  [[nodiscard]] std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// Builds a series from a table: two columns are read as (time, value), a
/// single column as values on unit spacing. With explicit column indices
/// the table may be wider.
TimeSeries series_from_table(const CsvTable& table, std::optional<std::size_t> time_column = std::nullopt,
                             std::optional<std::size_t> value_column = std::nullopt,
                             std::string label = {});

TimeSeries parse_series(std::string_view csv_text, std::string label = {});
TimeSeries load_series(const std::filesystem::path& path);

/// Writes "time,value" rows with 17 significant digits, which round-trips
/// finite doubles exactly through load_series.
void write_series(const TimeSeries& ts, std::ostream& out);
void save_series(const TimeSeries& ts, const std::filesystem::path& path);

/// Half-open index range [start, end).
struct PhaseBounds {
  std::size_t start = 0;
  std::size_t end = 0;

  [[nodiscard]] std::size_t length() const { return end - start; }
  friend bool operator==(const PhaseBounds&, const PhaseBounds&) = default;
};

/// One filter run cut out of a monitoring stream.
struct Cycle {
  TimeSeries series;
  std::size_t source_offset = 0;  ///< index of series[0] in the parent stream
  PhaseBounds phase;              ///< retained running phase within `series`
  bool complete = true;           ///< false when the stream ended before the cycle did

  Cycle(TimeSeries s, std::size_t offset, PhaseBounds bounds, bool is_complete = true);

  /// The retained running phase as its own series.
  [[nodiscard]] TimeSeries running_phase() const;

  friend bool operator==(const Cycle&, const Cycle&) = default;
};

std::string cycle_to_json(const Cycle& cycle);
Cycle cycle_from_json(std::string_view text);

/// Formats a double with 17 significant digits.
std::string format_double(double value);

}  // namespace hs
