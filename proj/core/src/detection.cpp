#include "hybridsmooth/detection.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "hybridsmooth/errors.hpp"
#include "hybridsmooth/hybrid_solver.hpp"
#include "hybridsmooth/timeseries.hpp"
#include "json_dump.hpp"

namespace hs {

namespace {

void check_inputs(Eigen::Index rows, const StepBasis& basis, const Eigen::VectorXd& times) {
  if (rows != basis.cols()) throw InputError("coefficient count does not match the step basis");
  if (times.size() != basis.rows()) throw InputError("time vector does not match the step basis");
}

CoefficientSummary base_summary(Eigen::Index j, const StepBasis& basis, const Eigen::VectorXd& times) {
  CoefficientSummary c;
  c.column = j;
  c.index = basis.column_times[static_cast<std::size_t>(j)];
  c.time = times(c.index);
  return c;
}

// Empirical quantile (linear interpolation) of a sorted vector.
double sorted_quantile(const std::vector<double>& v, double p) {
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

nlohmann::ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::vector<Eigen::Index> DetectionReport::flagged_indices() const {
  std::vector<Eigen::Index> out;
  for (const auto& c : coefficients) {
    if (c.flagged) out.push_back(c.index);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> DetectionReport::flagged_times() const {
  std::vector<double> out;
  for (const auto& c : coefficients) {
    if (c.flagged) out.push_back(c.time);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DetectionReport detect_hybrid(const Eigen::VectorXd& gamma, const StepBasis& basis, const Eigen::VectorXd& times,
                              double threshold) {
  check_inputs(gamma.size(), basis, times);
  if (!(threshold >= 0.0)) throw InputError("detection threshold must be nonnegative");
  DetectionReport r;
  r.method = "hybrid";
  r.threshold = threshold;
  const double cut = std::max(threshold, kActiveTolerance);
  for (Eigen::Index j = 0; j < gamma.size(); ++j) {
    CoefficientSummary c = base_summary(j, basis, times);
    c.estimate = gamma(j);
    c.lower = c.upper = gamma(j);
    c.flagged = std::abs(gamma(j)) > cut;
    r.coefficients.push_back(c);
  }
  return r;
}

DetectionReport detect_bayes(const Eigen::MatrixXd& gamma_draws, const StepBasis& basis, const Eigen::VectorXd& times,
                             double threshold, double level) {
  check_inputs(gamma_draws.rows(), basis, times);
  if (gamma_draws.cols() == 0) throw InputError("no posterior draws to summarize");
  if (!(threshold >= 0.0)) throw InputError("detection threshold must be nonnegative");
  if (!(level > 0.0 && level < 1.0)) throw InputError("credible level must lie in (0, 1)");
  DetectionReport r;
  r.method = "bayes";
  r.threshold = threshold;
  r.level = level;
  const double tail = 0.5 * (1.0 - level);
  std::vector<double> row(static_cast<std::size_t>(gamma_draws.cols()));
  for (Eigen::Index j = 0; j < gamma_draws.rows(); ++j) {
    for (Eigen::Index k = 0; k < gamma_draws.cols(); ++k) row[static_cast<std::size_t>(k)] = gamma_draws(j, k);
    std::sort(row.begin(), row.end());
    CoefficientSummary c = base_summary(j, basis, times);
    c.estimate = gamma_draws.row(j).mean();
    c.lower = sorted_quantile(row, tail);
    c.upper = sorted_quantile(row, 1.0 - tail);
    const bool excludes_zero = c.lower > 0.0 || c.upper < 0.0;
    c.flagged = excludes_zero && std::abs(c.estimate) > threshold;
    r.coefficients.push_back(c);
  }
  return r;
}

DetectionReport detect_bayes(const PosteriorSamples& samples, const StepBasis& basis, const Eigen::VectorXd& times,
                             double threshold, double level) {
  DetectionReport r = detect_bayes(samples.pooled_gamma(), basis, times, threshold, level);
  r.diagnostics = {{"ess_sigma2", samples.sigma2.ess},   {"ess_lambda2", samples.lambda2.ess},
                   {"ess_omega", samples.omega.ess},     {"rhat_sigma2", samples.sigma2.rhat},
                   {"rhat_lambda2", samples.lambda2.rhat}, {"rhat_omega", samples.omega.rhat},
                   {"chains", static_cast<double>(samples.chains.size())},
                   {"healthy_chains", static_cast<double>(samples.healthy_chains())}};
  return r;
}

std::string report_to_json(const DetectionReport& report) {
  using json = nlohmann::ordered_json;
  json j;
  j["method"] = report.method;
  j["threshold"] = number(report.threshold);
  if (report.level) j["level"] = number(*report.level);
  j["converged"] = report.converged;

  json flagged = json::array();
  for (const auto& c : report.coefficients) {
    if (!c.flagged) continue;
    json f;
    f["index"] = c.index;
    f["time"] = number(c.time);
    f["magnitude"] = number(c.estimate);
    if (report.level) {
      f["lower"] = number(c.lower);
      f["upper"] = number(c.upper);
    }
    flagged.push_back(std::move(f));
  }
  j["flagged"] = std::move(flagged);

  json penalties = json::object();
  for (const auto& [k, v] : report.penalties) penalties[k] = number(v);
  j["penalties"] = std::move(penalties);

  json diagnostics = json::object();
  for (const auto& [k, v] : report.diagnostics) diagnostics[k] = number(v);
  j["diagnostics"] = std::move(diagnostics);

  json coefficients = json::array();
  for (const auto& c : report.coefficients) {
    json e;
    e["index"] = c.index;
    e["time"] = number(c.time);
    e["estimate"] = number(c.estimate);
    if (report.level) {
      e["lower"] = number(c.lower);
      e["upper"] = number(c.upper);
    }
    e["flagged"] = c.flagged;
    coefficients.push_back(std::move(e));
  }
  j["coefficients"] = std::move(coefficients);

  if (report.runtime_seconds) j["runtime_seconds"] = number(*report.runtime_seconds);
  if (!report.config_json.empty()) j["config"] = json::parse(report.config_json);
  return detail::dump_json(j);
}

void write_interval_csv(const DetectionReport& report, std::ostream& out) {
  out << "index,time,estimate,lower,upper,flagged\n";
  for (const auto& c : report.coefficients) {
    out << c.index << ',' << format_double(c.time) << ',' << format_double(c.estimate) << ','
        << format_double(c.lower) << ',' << format_double(c.upper) << ',' << (c.flagged ? 1 : 0) << '\n';
  }
}

}  // namespace hs
