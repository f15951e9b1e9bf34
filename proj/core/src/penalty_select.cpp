#include "hybridsmooth/penalty_select.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <Eigen/QR>

#include "hybridsmooth/errors.hpp"
#include "hybridsmooth/parallel.hpp"
#include "hybridsmooth/timeseries.hpp"

namespace hs {

namespace {

std::vector<double> log_space(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = hi;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return out;
}

void check_grid(const std::vector<double>& values, const char* name) {
  if (values.empty()) throw InputError(std::string("grid_search: empty ") + name + " grid");
  for (const double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string("grid_search: ") + name + " must be positive");
  }
}

// Prefer the larger lambda, then the larger omega, among equal scores.
bool better(double score, std::size_t il, std::size_t io, double best, std::size_t best_il, std::size_t best_io,
            bool maximize) {
  if (std::isnan(best)) return true;
  if (score != best) return maximize ? score > best : score < best;
  if (il != best_il) return il > best_il;
  return io > best_io;
}

Selection pick(const PenaltyGrid& grid, std::vector<double> surface, bool maximize, const char* what) {
  Selection s;
  double best = kExcluded;
  for (std::size_t io = 0; io < grid.omegas.size(); ++io) {
    for (std::size_t il = 0; il < grid.lambdas.size(); ++il) {
      const double v = surface[io * grid.lambdas.size() + il];
      if (std::isnan(v)) continue;
      if (better(v, il, io, best, s.lambda_index, s.omega_index, maximize)) {
        best = v;
        s.lambda_index = il;
        s.omega_index = io;
      }
    }
  }
  if (std::isnan(best)) throw InputError(std::string(what) + ": no admissible grid cells");
  s.lambda = grid.lambdas[s.lambda_index];
  s.omega = grid.omegas[s.omega_index];
  s.surface = std::move(surface);
  return s;
}

}  // namespace

std::size_t PenaltyGrid::unconverged() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const GridCell& c) { return !c.converged; }));
}

double linear_baseline_rmse(const Eigen::VectorXd& y, const SplineDesign& design) {
  const Eigen::VectorXd beta = design.trend.colPivHouseholderQr().solve(y);
  return std::sqrt((y - design.trend * beta).squaredNorm() / static_cast<double>(y.size()));
}

double edf_total(const SplineDesign& design, double omega, const Eigen::VectorXd& gamma) {
  return hat_trace(design, omega) + static_cast<double>(count_active(gamma));
}

std::vector<double> default_omegas(const SplineDesign& design, std::size_t count) {
  const double n = static_cast<double>(design.size());
  const double high_edf = std::max(n / 2.0, 3.5);
  return log_space(omega_for_edf(design, high_edf), omega_for_edf(design, 3.0), count);
}

std::vector<double> default_lambdas(const HybridProblem& problem, double reference_omega, std::size_t count) {
  const double top = kkt_zero_threshold(problem.reduced(reference_omega));
  if (!(top > 0.0)) throw InputError("default_lambdas: response has no component outside the spline fit");
  return log_space(top * 1e-4, top, count);
}

PenaltyGrid grid_search(const Eigen::VectorXd& y, const SplineDesign& design, const StepBasis& basis,
                        std::vector<double> lambdas, std::vector<double> omegas, const GridOptions& options) {
  check_grid(lambdas, "lambda");
  check_grid(omegas, "omega");
  const HybridProblem problem(y, design, basis);

  PenaltyGrid grid;
  grid.n = design.size();
  grid.lambdas = std::move(lambdas);
  grid.omegas = std::move(omegas);
  grid.baseline_rmse = linear_baseline_rmse(y, design);
  grid.cells.resize(grid.lambdas.size() * grid.omegas.size());

  // Warm starts run from the sparsest end of each row.
  std::vector<std::size_t> order(grid.lambdas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid.lambdas[a] > grid.lambdas[b]; });

  parallel_for(grid.omegas.size(), options.threads, [&](std::size_t io) {
    const double omega = grid.omegas[io];
    const auto reduced = problem.reduced(omega);
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(basis.cols());
    for (const auto il : order) {
      const double lambda = grid.lambdas[il];
      const auto fit = problem.solve(reduced, lambda, omega, options.fista, warm);
      warm = fit.gamma_hat;
      GridCell& c = grid.cells[io * grid.lambdas.size() + il];
      c.lambda = lambda;
      c.omega = omega;
      c.rmse = fit.rmse;
      c.hat_trace = fit.edf_total - static_cast<double>(fit.n_active);
      c.edf = fit.edf_total;
      c.active = fit.n_active;
      c.admissible = fit.edf_total <= static_cast<double>(grid.n);
      c.converged = fit.converged;
      c.iterations = fit.iterations;
      c.gamma = fit.gamma_hat;
    }
  });
  return grid;
}

Selection elbow_select(const PenaltyGrid& grid) {
  const double n = static_cast<double>(grid.n);
  std::vector<double> surface(grid.cells.size(), kExcluded);
  for (std::size_t k = 0; k < grid.cells.size(); ++k) {
    const auto& c = grid.cells[k];
    if (!c.admissible) continue;
    const double e_ratio = grid.baseline_rmse > 0.0 ? c.rmse / grid.baseline_rmse : 0.0;
    surface[k] = 1.0 - (c.edf / n + static_cast<double>(c.active) / n + e_ratio);
  }
  return pick(grid, std::move(surface), true, "elbow_select");
}

double aicc_score(double sse, Eigen::Index n, double p) {
  const double nn = static_cast<double>(n);
  if (!(p < nn)) return std::numeric_limits<double>::infinity();
  return std::log(sse / nn) + (nn + p) / (nn - p);
}

Selection aicc_select(const PenaltyGrid& grid) {
  const double n = static_cast<double>(grid.n);
  std::vector<double> surface(grid.cells.size(), kExcluded);
  for (std::size_t k = 0; k < grid.cells.size(); ++k) {
    const auto& c = grid.cells[k];
    if (!c.admissible || !(c.edf < n)) continue;
    surface[k] = aicc_score(c.rmse * c.rmse * n, grid.n, c.edf);
  }
  return pick(grid, std::move(surface), false, "aicc_select");
}

void write_grid_csv(const PenaltyGrid& grid, const Selection& elbow, const Selection& aicc, std::ostream& out) {
  out << "lambda,omega,E,N,S,distance,aicc,admissible,converged\n";
  auto cell_value = [](double v) { return std::isnan(v) ? std::string("NA") : format_double(v); };
  for (std::size_t io = 0; io < grid.omegas.size(); ++io) {
    for (std::size_t il = 0; il < grid.lambdas.size(); ++il) {
      const auto k = io * grid.lambdas.size() + il;
      const auto& c = grid.cells[k];
      out << format_double(c.lambda) << ',' << format_double(c.omega) << ',' << format_double(c.rmse) << ','
          << format_double(c.edf) << ',' << c.active << ',' << cell_value(elbow.surface[k]) << ','
          << cell_value(aicc.surface[k]) << ',' << (c.admissible ? 1 : 0) << ',' << (c.converged ? 1 : 0) << '\n';
    }
  }
}

}  // namespace hs
