#include "hybridsmooth/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "json_dump.hpp"

#include "hybridsmooth/errors.hpp"

namespace hs {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view field) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    fields.push_back(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return fields;
}

}  // namespace

TimeSeries::TimeSeries(std::vector<double> times, std::vector<double> values, std::string label)
    : times_(std::move(times)), values_(std::move(values)), label_(std::move(label)) {
  if (times_.size() != values_.size()) {
    throw InputError("time series: " + std::to_string(times_.size()) + " times but " +
                     std::to_string(values_.size()) + " values");
  }
  if (values_.size() < kMinLength) {
    throw InputError("time series: need at least " + std::to_string(kMinLength) + " observations, got " +
                     std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(times_[i]) || !std::isfinite(values_[i])) {
      throw InputError("time series: non-finite entry at row " + std::to_string(i));
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw InputError("time series: non-increasing times at row " + std::to_string(i));
    }
  }
}

TimeSeries TimeSeries::from_values(std::vector<double> values, std::string label) {
  std::vector<double> times(values.size());
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = static_cast<double>(i);
  return TimeSeries(std::move(times), std::move(values), std::move(label));
}

Eigen::VectorXd TimeSeries::times_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(times_.data(), static_cast<Eigen::Index>(times_.size()));
}

Eigen::VectorXd TimeSeries::values_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(values_.data(), static_cast<Eigen::Index>(values_.size()));
}

TimeSeries TimeSeries::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw InputError("time series: slice out of range");
  return TimeSeries({times_.begin() + static_cast<std::ptrdiff_t>(begin), times_.begin() + static_cast<std::ptrdiff_t>(end)},
                    {values_.begin() + static_cast<std::ptrdiff_t>(begin), values_.begin() + static_cast<std::ptrdiff_t>(end)},
                    label_);
}

StandardizedSeries standardize_times(const TimeSeries& ts) {
  const double origin = ts.times().front();
  const double span = ts.times().back() - origin;
  // Strictly increasing times with n >= 4 guarantee span > 0.
  TimeMapping mapping{origin, span};
  if (origin == 0.0 && span == 1.0) return {ts, mapping};
  std::vector<double> unit(ts.size());
  for (std::size_t i = 0; i < unit.size(); ++i) unit[i] = mapping.to_unit(ts.times()[i]);
  unit.front() = 0.0;
  unit.back() = 1.0;
  return {TimeSeries(std::move(unit), ts.values(), ts.label()), mapping};
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool first_content_line = true;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = trim(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty()) continue;

    const auto fields = split_fields(line);
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (const auto f : fields) {
      const auto v = parse_double(f);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }

    if (first_content_line) {
      first_content_line = false;
      table.columns.resize(fields.size());
      if (!numeric) {
        for (const auto f : fields) table.header.emplace_back(trim(f));
        continue;
      }
    }
    if (!numeric) {
      throw InputError("csv: non-numeric or missing value on line " + std::to_string(line_no));
    }
    if (row.size() != table.columns.size()) {
      throw InputError("csv: expected " + std::to_string(table.columns.size()) + " fields on line " +
                       std::to_string(line_no) + ", got " + std::to_string(row.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) table.columns[c].push_back(row[c]);
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw InputError("read failure on " + path.string());
  return parse_csv(buffer.str());
}

TimeSeries series_from_table(const CsvTable& table, std::optional<std::size_t> time_column,
                             std::optional<std::size_t> value_column, std::string label) {
  const auto width = table.columns.size();
  if (width == 0) throw InputError("csv: no data");
  if (!value_column) {
    if (width == 1) {
      value_column = 0;
    } else if (width == 2) {
      time_column = time_column.value_or(0);
      value_column = 1;
    } else {
      throw InputError("csv: " + std::to_string(width) + " columns; specify which column holds the values");
    }
  }
  if (*value_column >= width || (time_column && *time_column >= width)) {
    throw InputError("csv: column index out of range");
  }
  const auto& values = table.columns[*value_column];
  if (values.size() < TimeSeries::kMinLength) {
    throw InputError("csv: fewer than " + std::to_string(TimeSeries::kMinLength) + " usable rows (got " +
                     std::to_string(values.size()) + ")");
  }
  if (!time_column) return TimeSeries::from_values(values, std::move(label));
  return TimeSeries(table.columns[*time_column], values, std::move(label));
}

TimeSeries parse_series(std::string_view csv_text, std::string label) {
  return series_from_table(parse_csv(csv_text), std::nullopt, std::nullopt, std::move(label));
}

TimeSeries load_series(const std::filesystem::path& path) {
  return series_from_table(read_csv(path), std::nullopt, std::nullopt, path.stem().string());
}

std::string format_double(double value) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof(buf), "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

void write_series(const TimeSeries& ts, std::ostream& out) {
  out << "time,value\n";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out << format_double(ts.times()[i]) << ',' << format_double(ts.values()[i]) << '\n';
  }
}

void save_series(const TimeSeries& ts, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_series(ts, out);
  if (!out) throw InputError("write failure on " + path.string());
}

Cycle::Cycle(TimeSeries s, std::size_t offset, PhaseBounds bounds, bool is_complete)
    : series(std::move(s)), source_offset(offset), phase(bounds), complete(is_complete) {
  if (!(phase.start < phase.end) || phase.end > series.size()) {
    throw InputError("cycle: phase bounds [" + std::to_string(phase.start) + ", " + std::to_string(phase.end) +
                     ") outside series of length " + std::to_string(series.size()));
  }
}

TimeSeries Cycle::running_phase() const { return series.slice(phase.start, phase.end); }

std::string cycle_to_json(const Cycle& cycle) {
  nlohmann::ordered_json j;
  j["label"] = cycle.series.label();
  j["source_offset"] = cycle.source_offset;
  j["phase"] = {{"start", cycle.phase.start}, {"end", cycle.phase.end}};
  j["complete"] = cycle.complete;
  j["times"] = cycle.series.times();
  j["values"] = cycle.series.values();
  return detail::dump_json(j);
}

Cycle cycle_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    TimeSeries series(j.at("times").get<std::vector<double>>(), j.at("values").get<std::vector<double>>(),
                      j.value("label", std::string{}));
    PhaseBounds phase{j.at("phase").at("start").get<std::size_t>(), j.at("phase").at("end").get<std::size_t>()};
    return Cycle(std::move(series), j.at("source_offset").get<std::size_t>(), phase, j.value("complete", true));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("cycle json: ") + e.what());
  }
}

}  // namespace hs
