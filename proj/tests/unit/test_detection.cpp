#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "hybridsmooth/detection.hpp"

using namespace hs;

namespace {

const StepBasis& basis10() {
  static const StepBasis b = step_basis(10, BasisVariant::forward);
  return b;
}

Eigen::VectorXd times10() { return Eigen::VectorXd::LinSpaced(10, 100, 190); }

Eigen::MatrixXd draws_around(const Eigen::VectorXd& centers, double spread, int count) {
  Eigen::MatrixXd d(centers.size(), count);
  for (int k = 0; k < count; ++k) {
    const double u = -1.0 + 2.0 * k / (count - 1.0);
    d.col(k) = centers.array() + spread * u;
  }
  return d;
}

}  // namespace

TEST_CASE("hybrid rule flags coefficients above the threshold") {
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(9);
  gamma(2) = 0.3;
  gamma(5) = -0.1;
  gamma(7) = 1e-12;
  const auto report = detect_hybrid(gamma, basis10(), times10(), 0.15);
  CHECK(report.method == "hybrid");
  CHECK(report.flagged_indices() == std::vector<Eigen::Index>{3});
  CHECK(report.flagged_times() == std::vector<double>{130.0});
  const auto loose = detect_hybrid(gamma, basis10(), times10(), 0.0);
  CHECK(loose.flagged_indices() == std::vector<Eigen::Index>{3, 6});
  CHECK(report.coefficients.size() == 9);
  CHECK(report.coefficients[2].index == 3);
  CHECK(report.coefficients[2].estimate == 0.3);
}

TEST_CASE("bayes rule needs both an interval off zero and a large mean") {
  SUBCASE("all-zero draws") {
    const auto r = detect_bayes(Eigen::MatrixXd::Zero(9, 200), basis10(), times10());
    CHECK(r.flagged_indices().empty());
  }
  SUBCASE("draws concentrated at 0.5") {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(9);
    c(4) = 0.5;
    const auto r = detect_bayes(draws_around(c, 0.01, 400), basis10(), times10());
    CHECK(r.flagged_indices() == std::vector<Eigen::Index>{5});
    CHECK(r.coefficients[4].estimate == doctest::Approx(0.5));
    CHECK(r.coefficients[4].lower > 0.48);
    CHECK(r.coefficients[4].upper < 0.52);
    CHECK(*r.level == 0.95);
  }
  SUBCASE("mean 0.10 with an interval off zero stays below the threshold") {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(9);
    c(4) = 0.10;
    const auto r = detect_bayes(draws_around(c, 0.02, 400), basis10(), times10(), 0.15);
    CHECK(r.coefficients[4].lower > 0.0);
    CHECK(r.flagged_indices().empty());
  }
  SUBCASE("large mean with an interval covering zero") {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(9);
    c(4) = -0.4;
    const auto r = detect_bayes(draws_around(c, 0.6, 400), basis10(), times10(), 0.15);
    CHECK(r.coefficients[4].upper > 0.0);
    CHECK(r.flagged_indices().empty());
  }
  SUBCASE("interval endpoints are central quantiles") {
    Eigen::MatrixXd d(9, 101);
    for (int k = 0; k <= 100; ++k) d.col(k).setConstant(k);
    const auto r = detect_bayes(d, basis10(), times10(), 0.0, 0.9);
    CHECK(r.coefficients[0].lower == doctest::Approx(5.0));
    CHECK(r.coefficients[0].upper == doctest::Approx(95.0));
    CHECK(r.coefficients[0].estimate == doctest::Approx(50.0));
  }
}

TEST_CASE("report serializes in a fixed key order") {
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(9);
  gamma(2) = 0.1;
  auto report = detect_hybrid(gamma, basis10(), times10(), 0.0);
  report.penalties = {{"lambda", 0.5}, {"omega", 1e-3}};
  const auto text = report_to_json(report);
  const auto j = nlohmann::ordered_json::parse(text);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys.front() == "method");
  CHECK(j["flagged"].size() == 1);
  CHECK(j["penalties"]["lambda"] == 0.5);
  CHECK(j["coefficients"].size() == 9);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  CHECK(report_to_json(report) == text);

  std::ostringstream csv;
  write_interval_csv(report, csv);
  CHECK(csv.str().rfind("index,time,estimate,lower,upper,flagged\n", 0) == 0);
}
