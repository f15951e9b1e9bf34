#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "hybridsmooth/anomaly_basis.hpp"
#include "hybridsmooth/hybrid_solver.hpp"
#include "hybridsmooth/spline_gp.hpp"

namespace hs {

struct GridCell {
  double lambda = 0.0;
  double omega = 0.0;
  double rmse = 0.0;      ///< E(lambda, omega)
  double hat_trace = 0.0;  ///< H1(omega)
  double edf = 0.0;        ///< N = H1 + S
  Eigen::Index active = 0;  ///< S, number of nonzero gamma
  bool admissible = false;  ///< N <= n
  bool converged = false;
  int iterations = 0;
  Eigen::VectorXd gamma;
};

/// Hybrid fits over a lambda x omega grid. Cells are stored omega-major:
/// cell(il, io) = cells[io * lambdas.size() + il].
struct PenaltyGrid {
  std::vector<double> lambdas;
  std::vector<double> omegas;
  std::vector<GridCell> cells;
  double baseline_rmse = 0.0;  ///< E0, OLS fit of [1, t]
  Eigen::Index n = 0;

  [[nodiscard]] const GridCell& cell(std::size_t lambda_index, std::size_t omega_index) const {
    return cells[omega_index * lambdas.size() + lambda_index];
  }
  [[nodiscard]] std::size_t unconverged() const;
};

struct GridOptions {
  FistaOptions fista;
  unsigned threads = 1;
};

/// RMSE of the least-squares linear trend fit.
double linear_baseline_rmse(const Eigen::VectorXd& y, const SplineDesign& design);

/// Fills every cell. Within an omega row fits are warm-started from the
/// largest lambda down; rows are independent and may run in parallel.
PenaltyGrid grid_search(const Eigen::VectorXd& y, const SplineDesign& design, const StepBasis& basis,
                        std::vector<double> lambdas, std::vector<double> omegas, const GridOptions& options = {});

/// Omegas log-spaced between the values giving spline edf n/2 and 3.
std::vector<double> default_omegas(const SplineDesign& design, std::size_t count = 25);

/// Lambdas log-spaced over [1e-4, 1] x lambda_kkt, where lambda_kkt is the
/// zero-solution threshold 2 ||Psi'W^2 y||_inf at `reference_omega`. The
/// threshold grows with omega, so passing the largest grid omega makes the
/// top of the grid the all-zero fit for every row.
std::vector<double> default_lambdas(const HybridProblem& problem, double reference_omega, std::size_t count = 25);

/// H1(omega) + #{|gamma_j| > 1e-10}.
double edf_total(const SplineDesign& design, double omega, const Eigen::VectorXd& gamma);

inline constexpr double kExcluded = std::numeric_limits<double>::quiet_NaN();

struct Selection {
  std::size_t lambda_index = 0;
  std::size_t omega_index = 0;
  double lambda = 0.0;
  double omega = 0.0;
  std::vector<double> surface;  ///< per cell, same layout as PenaltyGrid::cells; NaN if excluded
};

/// Farthest point below the simplex plane: maximizes 1 - (N/n + S/n + E/E0)
/// over admissible cells; ties go to the larger lambda, then larger omega.
Selection elbow_select(const PenaltyGrid& grid);

/// log(SSE/n) + (n + p)/(n - p) with p = N; cells with p >= n are excluded.
double aicc_score(double sse, Eigen::Index n, double p);
Selection aicc_select(const PenaltyGrid& grid);

/// Long-format CSV: lambda, omega, E, N, S, distance, aicc, admissible, converged.
void write_grid_csv(const PenaltyGrid& grid, const Selection& elbow, const Selection& aicc, std::ostream& out);

}  // namespace hs
