#include <doctest.h>

#include <sstream>

#include "hybridsmooth/errors.hpp"
#include "hybridsmooth/timeseries.hpp"

using namespace hs;

TEST_CASE("time series validates its invariants") {
  CHECK_NOTHROW(TimeSeries({0, 1, 2, 3}, {1, 2, 3, 4}));
  CHECK_THROWS_AS(TimeSeries({0, 1, 2}, {1, 2, 3}), InputError);
  CHECK_THROWS_AS(TimeSeries({0, 1, 2, 3}, {1, 2, 3}), InputError);
  CHECK_THROWS_AS(TimeSeries({0, 1, 1, 3}, {1, 2, 3, 4}), InputError);
  CHECK_THROWS_AS(TimeSeries({0, 2, 1, 3}, {1, 2, 3, 4}), InputError);
  CHECK_THROWS_AS(TimeSeries({0, 1, 2, 3}, {1, 2, NAN, 4}), InputError);
  CHECK_THROWS_AS(TimeSeries({0, 1, INFINITY, 3}, {1, 2, 3, 4}), InputError);
}

TEST_CASE("standardized times span [0, 1] and standardizing is idempotent") {
  const TimeSeries ts({10, 12.5, 13, 20, 31}, {1, 2, 3, 4, 5});
  const auto once = standardize_times(ts);
  CHECK(once.series.times().front() == 0.0);
  CHECK(once.series.times().back() == 1.0);
  CHECK(once.series.values() == ts.values());
  CHECK(once.mapping.from_unit(once.series.times()[3]) == doctest::Approx(20.0));
  const auto twice = standardize_times(once.series);
  CHECK(twice.series == once.series);
}

TEST_CASE("csv parsing detects headers and reports bad lines") {
  const auto with_header = parse_csv("time,value\n0,1.5\n1,2.5\n\n2,3.5\n");
  CHECK(with_header.header == std::vector<std::string>{"time", "value"});
  CHECK(with_header.rows() == 3);
  CHECK(with_header.columns[1][2] == 3.5);

  const auto bare = parse_csv("1\n2\n3\n4\n");
  CHECK(bare.header.empty());
  CHECK(bare.columns.size() == 1);

  CHECK_THROWS_WITH_AS(parse_csv("t,v\n0,1\n1,x\n"), doctest::Contains("line 3"), InputError);
  CHECK_THROWS_AS(parse_csv("t,v\n0,1\n1\n"), InputError);
}

TEST_CASE("series from table chooses columns") {
  const auto one = series_from_table(parse_csv("5\n6\n7\n8\n"));
  CHECK(one.times() == std::vector<double>{0, 1, 2, 3});
  const auto two = series_from_table(parse_csv("0.5,5\n1,6\n2,7\n4,8\n"));
  CHECK(two.times() == std::vector<double>{0.5, 1, 2, 4});
  CHECK_THROWS_AS(series_from_table(parse_csv("1,2,3\n4,5,6\n7,8,9\n1,2,3\n")), InputError);
  const auto picked = series_from_table(parse_csv("1,2,3\n4,5,6\n7,8,9\n10,11,12\n"), 0, 2);
  CHECK(picked.values() == std::vector<double>{3, 6, 9, 12});
  CHECK_THROWS_AS(series_from_table(parse_csv("1\n2\n3\n")), InputError);
  CHECK_THROWS_AS(load_series("/nonexistent/file.csv"), InputError);
}

TEST_CASE("written series round-trip exactly") {
  const TimeSeries valid({0.1, 0.2, 0.30000000000000004, 0.7}, {1.0 / 3.0, -2.5e-17, 7.0, 1e300}, "x");
  std::ostringstream out;
  write_series(valid, out);
  const auto back = parse_series(out.str(), "x");
  CHECK(back == valid);
}

TEST_CASE("cycle validates bounds and survives json") {
  const auto ts = TimeSeries::from_values({1, 2, 3, 4, 5, 6}, "c");
  CHECK_THROWS_AS(Cycle(ts, 0, PhaseBounds{4, 4}), InputError);
  CHECK_THROWS_AS(Cycle(ts, 0, PhaseBounds{0, 7}), InputError);
  const Cycle c(ts, 12, PhaseBounds{1, 5}, false);
  CHECK(c.running_phase().values() == std::vector<double>{2, 3, 4, 5});
  CHECK(cycle_from_json(cycle_to_json(c)) == c);
  CHECK_THROWS_AS(cycle_from_json("{\"times\": 3}"), InputError);
}

TEST_CASE("doubles are formatted with 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(2.0) == "2");
}
