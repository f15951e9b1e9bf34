#include "hybridsmooth/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <ostream>
#include <string>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "hybridsmooth/detection.hpp"
#include "hybridsmooth/errors.hpp"
#include "hybridsmooth/parallel.hpp"
#include "json_dump.hpp"

namespace hs {

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

Eigen::VectorXd reference_trend(Eigen::Index n, double top) {
  if (n < 2) throw InputError("reference trend needs at least two samples");
  constexpr double rate = 8.0;
  constexpr double knee = 0.6;
  // Integral of the logistic slope 1 / (1 + exp(rate (u - knee))) from 0 to x.
  const auto integral = [&](double x) { return x - (softplus(rate * (x - knee)) - softplus(-rate * knee)) / rate; };
  const double scale = top / integral(1.0);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i) = scale * integral(static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return out;
}

TimeSeries synth_cycle(const Eigen::VectorXd& trend, double size, Eigen::Index index, double sigma, Random& rng) {
  if (!(sigma >= 0.0) || !std::isfinite(size)) throw InputError("synth_cycle: invalid size or sigma");
  if (index < 0 || index > trend.size()) throw InputError("synth_cycle: disturbance index outside the trend");
  const double sign = rng.coin() ? 1.0 : -1.0;
  std::vector<double> values(static_cast<std::size_t>(trend.size()));
  for (Eigen::Index i = 0; i < trend.size(); ++i) {
    double v = trend(i) + (i >= index ? sign * size : 0.0);
    if (sigma > 0.0) v += sigma * rng.normal();
    values[static_cast<std::size_t>(i)] = v;
  }
  return TimeSeries::from_values(std::move(values), "synthetic");
}

std::string_view to_string(StudyMethod method) {
  switch (method) {
    case StudyMethod::hybrid_elbow:
      return "hybrid_elbow";
    case StudyMethod::hybrid_aicc:
      return "hybrid_aicc";
    case StudyMethod::bayes:
      return "bayes";
  }
  return "unknown";
}

StudyMethod parse_study_method(std::string_view name) {
  if (name == "hybrid_elbow" || name == "elbow") return StudyMethod::hybrid_elbow;
  if (name == "hybrid_aicc" || name == "aicc") return StudyMethod::hybrid_aicc;
  if (name == "bayes") return StudyMethod::bayes;
  throw InputError("unknown study method '" + std::string(name) + "'");
}

void StudyConfig::validate() const {
  if (sizes.empty() || sigmas.empty()) throw InputError("study grids must be nonempty");
  if (replicates < 1) throw InputError("study needs at least one replicate");
  if (methods.empty()) throw InputError("study needs at least one method");
  if (trend.size() < 4) throw InputError("study trend is too short");
  if (disturbance_index <= 0 || disturbance_index >= trend.size()) {
    throw InputError("disturbance index must be interior to the trend");
  }
  for (double s : sizes) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InputError("disturbance sizes must be finite and nonnegative");
  }
  for (double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InputError("noise levels must be finite and nonnegative");
  }
  if (window < 0) throw InputError("detection window must be nonnegative");
  bayes.chains.validate();
}

bool detects(const std::vector<Eigen::Index>& flagged, Eigen::Index index, Eigen::Index window) {
  return std::any_of(flagged.begin(), flagged.end(), [&](Eigen::Index f) { return std::abs(f - index) <= window; });
}

std::vector<DetectionSurface> detection_surfaces(const StudyConfig& config) {
  config.validate();
  const auto n = config.trend.size();
  const SplineDesign design = build_design(Eigen::VectorXd::LinSpaced(n, 0.0, 1.0));
  const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));

  const bool wants_hybrid = std::any_of(config.methods.begin(), config.methods.end(),
                                        [](StudyMethod m) { return m != StudyMethod::bayes; });
  const StepBasis hybrid_basis = step_basis(n, config.hybrid.basis);
  const StepBasis bayes_basis = step_basis(n, config.bayes.basis);

  const std::size_t n_cells = config.sizes.size() * config.sigmas.size();
  const auto reps = static_cast<std::size_t>(config.replicates);
  // outcome[method][cell * reps + r]: 1 detected, 0 missed, -1 failed.
  std::vector<std::vector<int>> outcome(config.methods.size(), std::vector<int>(n_cells * reps, -1));

  HybridSettings hybrid = config.hybrid;
  hybrid.grid.threads = 1;
  BayesSettings bayes = config.bayes;
  bayes.chains.threads = 1;
  bayes.anchor.grid.threads = 1;

  parallel_for(n_cells * reps, config.threads, [&](std::size_t job) {
    const std::size_t k = job / reps;
    const std::size_t r = job % reps;
    const double size = config.sizes[k / config.sigmas.size()];
    const double sigma = config.sigmas[k % config.sigmas.size()];
    Random rng(derive_seed(config.seed, k, r));
    const TimeSeries series = synth_cycle(config.trend, size, config.disturbance_index, sigma, rng);
    const Eigen::VectorXd y = series.values_vector();

    std::optional<HybridAnalysis> hybrid_result;
    bool hybrid_failed = false;
    if (wants_hybrid) {
      try {
        hybrid_result = analyze_hybrid(y, design, hybrid_basis, hybrid);
      } catch (const std::exception& e) {
        hybrid_failed = true;
        spdlog::debug("cell {} replicate {}: hybrid analysis failed: {}", k, r, e.what());
      }
    }
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      const StudyMethod method = config.methods[m];
      int& slot = outcome[m][job];
      try {
        if (method == StudyMethod::bayes) {
          BayesSettings local = bayes;
          local.chains.seed = derive_seed(config.seed, k, r + reps);
          // The hybrid fit above already is the anchor when the settings agree.
          if (!local.priors && local.anchor_priors && hybrid_result && local.anchor.basis == hybrid.basis &&
              local.anchor.omega_points == hybrid.omega_points && local.anchor.lambda_points == hybrid.lambda_points) {
            local.priors = hybrid_anchored_priors(*hybrid_result);
          }
          const auto result = analyze_bayes(y, design, bayes_basis, local);
          const auto report = detect_bayes(result.samples, bayes_basis, times, config.bayes_threshold, config.level);
          slot = detects(report.flagged_indices(), config.disturbance_index, config.window) ? 1 : 0;
        } else if (!hybrid_failed) {
          const auto& fit = method == StudyMethod::hybrid_elbow ? hybrid_result->elbow_fit : hybrid_result->aicc_fit;
          const auto report = detect_hybrid(fit.gamma_hat, hybrid_basis, times, config.hybrid_threshold);
          slot = detects(report.flagged_indices(), config.disturbance_index, config.window) ? 1 : 0;
        }
      } catch (const NumericalError& e) {
        spdlog::debug("cell {} replicate {}: {} failed: {}", k, r, to_string(method), e.what());
      }
    }
  });

  std::vector<DetectionSurface> out;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    DetectionSurface s;
    s.method = config.methods[m];
    s.sizes = config.sizes;
    s.sigmas = config.sigmas;
    for (std::size_t k = 0; k < n_cells; ++k) {
      SurfaceCell c;
      c.size = config.sizes[k / config.sigmas.size()];
      c.sigma = config.sigmas[k % config.sigmas.size()];
      for (std::size_t r = 0; r < reps; ++r) {
        const int v = outcome[m][k * reps + r];
        if (v < 0) {
          ++c.failures;
        } else {
          ++c.total;
          c.detections += static_cast<std::size_t>(v);
        }
      }
      if (static_cast<double>(c.failures) > 0.05 * static_cast<double>(reps)) {
        spdlog::warn("{}: {} of {} replicates failed at size {} sigma {}", to_string(s.method), c.failures, reps,
                     c.size, c.sigma);
      }
      s.cells.push_back(c);
    }
    out.push_back(std::move(s));
  }
  return out;
}

DetectionSurface detection_surface(const StudyConfig& config) { return detection_surfaces(config).front(); }

void write_surface_csv(const DetectionSurface& surface, std::ostream& out) {
  out << "size,sigma,p,n_detect,n_total\n";
  for (const auto& c : surface.cells) {
    out << format_double(c.size) << ',' << format_double(c.sigma) << ',' << format_double(c.probability()) << ','
        << c.detections << ',' << c.total << '\n';
  }
}

std::string surface_contours_json(const DetectionSurface& surface) {
  using json = nlohmann::ordered_json;
  json root;
  root["method"] = std::string(to_string(surface.method));
  root["x"] = "size";
  root["y"] = "sigma";
  json contours = json::array();
  const auto nx = surface.sizes.size();
  const auto ny = surface.sigmas.size();
  for (double level : surface.contour_levels) {
    json segments = json::array();
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      for (std::size_t j = 0; j + 1 < ny; ++j) {
        // Corners counter-clockwise from (i, j).
        const std::array<std::pair<std::size_t, std::size_t>, 4> corner{{{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}}};
        std::vector<std::array<double, 2>> points;
        for (std::size_t e = 0; e < 4; ++e) {
          const auto [ai, aj] = corner[e];
          const auto [bi, bj] = corner[(e + 1) % 4];
          const double pa = surface.cell(ai, aj).probability();
          const double pb = surface.cell(bi, bj).probability();
          if ((pa < level) == (pb < level)) continue;
          const double w = (level - pa) / (pb - pa);
          points.push_back({surface.sizes[ai] + w * (surface.sizes[bi] - surface.sizes[ai]),
                            surface.sigmas[aj] + w * (surface.sigmas[bj] - surface.sigmas[aj])});
        }
        for (std::size_t p = 0; p + 1 < points.size(); p += 2) {
          segments.push_back({{points[p][0], points[p][1]}, {points[p + 1][0], points[p + 1][1]}});
        }
      }
    }
    json c;
    c["level"] = level;
    c["segments"] = std::move(segments);
    contours.push_back(std::move(c));
  }
  root["contours"] = std::move(contours);
  return detail::dump_json(root);
}

}  // namespace hs
