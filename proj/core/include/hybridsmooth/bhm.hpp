#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "hybridsmooth/anomaly_basis.hpp"
#include "hybridsmooth/random.hpp"
#include "hybridsmooth/spline_gp.hpp"

namespace hs {

/// Reparametrization operators of the orthogonalized hierarchical model.
///
///   P_X   = X (X'X)^{-1} X'
///   Psi*  = (I - P_X) Psi
///   P_Psi = Psi* (Psi*'Psi* + delta I)^{-1} Psi*'
///   J     = (Psi*'Psi* + delta I)^{-1} Psi*' (I - P_X)
///   H     = (I - P_Psi)(I - P_X)
///
/// so that y = X beta* + Psi* gamma* + H g + eps with
/// gamma* = gamma + J g and beta* = beta + (X'X)^{-1} X'(Psi gamma + g).
/// The regularized inverse is applied through the SVD of Psi*; its single
/// structural zero singular value (the step basis plus an intercept spans
/// R^n) is set to exactly zero.
struct OrthoOperators {
  Eigen::MatrixXd projection_x;
  Eigen::MatrixXd psi_star;
  Eigen::MatrixXd projection_psi;
  Eigen::MatrixXd coupling;      ///< J, (n-1) x n
  Eigen::MatrixXd residual_map;  ///< H, n x n
  double delta = 1e-8;
  double smallest_singular = 0.0;  ///< smallest nonzero singular value of Psi*
  bool orthogonalized = true;
};

OrthoOperators orthogonalize(const SplineDesign& design, const StepBasis& basis, double delta = 1e-8);

/// Operators of the model without reparametrization (P_X = P_Psi = 0, so
/// Psi* = Psi, J = 0, H = I). Kept to compare mixing.
OrthoOperators plain_operators(const SplineDesign& design, const StepBasis& basis);

/// Gamma priors (shape/rate) on lambda^2 and omega; beta* and sigma^2 are flat.
struct Priors {
  double lambda2_shape = 2.0;
  double lambda2_rate = 2.0;
  double omega_shape = 2.0;
  double omega_rate = 2.0;

  void validate() const;
};

/// Shape-2 priors whose means carry the penalties of a hybrid fit over to
/// the Bayesian scale: lambda^2 = (lambda / (2 sigma))^2 and
/// omega_bayes = omega / sigma^2, with sigma^2 the hybrid residual variance.
Priors anchored_priors(double lambda_hat, double omega_hat, double sigma2_hat, double shape = 2.0);

struct MCMCState {
  Eigen::VectorXd beta_star;   ///< 2
  Eigen::VectorXd gamma_star;  ///< n-1
  Eigen::VectorXd g;           ///< n, Gaussian-process component
  Eigen::VectorXd tau2;        ///< n-1, diagonal of F
  double sigma2 = 0.0;         ///< NaN until the first sweep
  double lambda2 = 0.0;
  double omega = 0.0;
  std::size_t tau_clamps = 0;  ///< tau^2 draws clamped at the numerical floor
};

/// Components to hold fixed during a sweep. Used to check single
/// conditionals and reduced models; a default sweep updates everything.
struct GibbsControls {
  bool fix_sigma2 = false;
  bool fix_beta = false;
  bool fix_gamma = false;
  bool fix_tau2 = false;
  bool fix_lambda2 = false;
  bool fix_g = false;
  bool fix_omega = false;
};

/// Back-transformed draw in the original parametrization.
struct NaturalDraw {
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
};

/// Everything a sweep needs that does not change between sweeps.
///
/// g is drawn in whitened coordinates g = L u with K = L L', which turns the
/// precision omega K^{-1} + M / sigma^2 into omega I + L'M L / sigma^2 and
/// keeps the factorization well conditioned. K is singular at t = 0 and is
/// factored once with the standard jitter.
class GibbsModel {
 public:
  GibbsModel(Eigen::VectorXd y, const SplineDesign& design, const StepBasis& basis, OrthoOperators ops);

  void update_sigma2(MCMCState& s, Random& rng) const;
  void update_beta(MCMCState& s, Random& rng) const;
  void update_gamma(MCMCState& s, Random& rng) const;
  void update_tau2(MCMCState& s, Random& rng) const;
  void update_lambda2(MCMCState& s, const Priors& priors, Random& rng) const;
  void update_g(MCMCState& s, Random& rng) const;
  void update_omega(MCMCState& s, const Priors& priors, Random& rng) const;

  /// Conditional mean and precision Cholesky factor of beta* (scaled by sigma^2).
  [[nodiscard]] Eigen::VectorXd beta_conditional_mean(const MCMCState& s) const;
  [[nodiscard]] Eigen::VectorXd gamma_conditional_mean(const MCMCState& s) const;
  [[nodiscard]] double sigma2_conditional_rate(const MCMCState& s) const;

  /// y - X beta* - Psi* gamma* - H g.
  [[nodiscard]] Eigen::VectorXd residual(const MCMCState& s) const;
  /// g' K^{-1} g with the jittered K.
  [[nodiscard]] double g_quadratic(const Eigen::VectorXd& g) const;

  [[nodiscard]] NaturalDraw back_transform(const MCMCState& s) const;
  /// X beta* + Psi* gamma* + H g.
  [[nodiscard]] Eigen::VectorXd signal(const MCMCState& s) const;

  [[nodiscard]] const Eigen::VectorXd& y() const { return y_; }
  [[nodiscard]] const OrthoOperators& ops() const { return ops_; }
  [[nodiscard]] const SplineDesign& design() const { return *design_; }
  [[nodiscard]] const StepBasis& basis() const { return *basis_; }
  [[nodiscard]] Eigen::Index n() const { return y_.size(); }
  [[nodiscard]] double covariance_jitter() const { return k_jitter_; }

 private:
  Eigen::VectorXd y_;
  const SplineDesign* design_;
  const StepBasis* basis_;
  OrthoOperators ops_;
  Eigen::Matrix2d xtx_inv_;
  Eigen::Matrix2d xtx_inv_chol_;
  Eigen::MatrixXd psi_gram_;       // Psi*'Psi*
  Eigen::MatrixXd k_chol_;         // L, lower
  double k_jitter_ = 0.0;
  Eigen::MatrixXd h_white_;        // H L
  Eigen::MatrixXd h_white_gram_;   // (H L)'(H L)
  Eigen::MatrixXd j_white_;        // J L
};

inline constexpr double kTauFloor = 1e-12;

/// Starting state: gamma from the largest first differences (z_i >= 95th
/// percentile keeps z_i, else 0), beta from OLS of y - Psi gamma on X,
/// g = 0, lambda^2 and omega at their prior means, tau^2 at 2 / lambda^2.
/// sigma^2 is left unset and drawn first.
MCMCState init_state(const GibbsModel& model, const Priors& priors);

/// One full sweep in the order sigma^2, beta*, gamma*, tau^2, lambda^2, g, omega.
void gibbs_step(MCMCState& state, const GibbsModel& model, const Priors& priors, Random& rng,
                const GibbsControls& controls = {});

struct ChainConfig {
  int chains = 4;
  int iterations = 1000;  ///< total sweeps per chain, burn-in included
  int burnin = 200;
  int thin = 1;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool keep_raw = false;  ///< also store beta* and gamma* draws

  void validate() const;
  [[nodiscard]] int retained() const { return (iterations - burnin + thin - 1) / thin; }
};

/// Retained draws of one chain; columns are iterations.
struct ChainSamples {
  Eigen::MatrixXd beta;
  Eigen::MatrixXd gamma;
  Eigen::MatrixXd g;
  std::vector<double> sigma2;
  std::vector<double> lambda2;
  std::vector<double> omega;
  Eigen::MatrixXd beta_star;   ///< only with keep_raw
  Eigen::MatrixXd gamma_star;  ///< only with keep_raw
  bool failed = false;
  std::string error;
  std::size_t tau_clamps = 0;
};

struct ParameterDiagnostics {
  double ess = 0.0;
  double rhat = 0.0;
};

struct PosteriorSamples {
  std::vector<ChainSamples> chains;
  ChainConfig config;
  ParameterDiagnostics sigma2;
  ParameterDiagnostics lambda2;
  ParameterDiagnostics omega;

  [[nodiscard]] std::size_t healthy_chains() const;
  /// All retained gamma draws of healthy chains, (n-1) x total.
  [[nodiscard]] Eigen::MatrixXd pooled_gamma() const;
  [[nodiscard]] Eigen::MatrixXd pooled_g() const;
  [[nodiscard]] Eigen::MatrixXd pooled_beta() const;
  [[nodiscard]] double min_scalar_ess() const;
};

/// Runs independent seeded chains (chain c uses derive_seed(seed, c)) and
/// back-transforms every retained draw. Throws only if every chain fails.
PosteriorSamples run_chains(const GibbsModel& model, const Priors& priors, const ChainConfig& config);

}  // namespace hs
