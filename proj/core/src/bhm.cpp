#include "hybridsmooth/bhm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <spdlog/spdlog.h>

#include "hybridsmooth/diagnostics.hpp"
#include "hybridsmooth/errors.hpp"
#include "hybridsmooth/linalg.hpp"
#include "hybridsmooth/parallel.hpp"

namespace hs {

namespace {

void check_shapes(const SplineDesign& design, const StepBasis& basis) {
  if (basis.rows() != design.size() || basis.cols() != design.size() - 1) {
    throw InputError("step basis does not match the spline design size");
  }
}

// Linear-interpolation sample quantile (R type 7).
double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

OrthoOperators orthogonalize(const SplineDesign& design, const StepBasis& basis, double delta) {
  check_shapes(design, basis);
  if (!(delta > 0.0)) throw InputError("orthogonalization delta must be positive");
  const auto n = design.size();
  const Eigen::MatrixXd& x = design.trend;

  OrthoOperators ops;
  ops.delta = delta;
  const Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
  ops.projection_x = x * xtx_inv * x.transpose();
  const Eigen::MatrixXd resid_x = Eigen::MatrixXd::Identity(n, n) - ops.projection_x;
  ops.psi_star = resid_x * basis.psi;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(ops.psi_star, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd s = svd.singularValues();
  const double cutoff = 1e-10 * s(0);
  ops.smallest_singular = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) <= cutoff) {
      s(i) = 0.0;
    } else {
      ops.smallest_singular = std::min(ops.smallest_singular, s(i));
    }
  }
  const Eigen::ArrayXd s2 = s.array().square();
  const Eigen::VectorXd inv_weights = (s.array() / (s2 + delta)).matrix();
  const Eigen::VectorXd proj_weights = (s2 / (s2 + delta)).matrix();
  const Eigen::MatrixXd& u = svd.matrixU();
  const Eigen::MatrixXd& v = svd.matrixV();

  ops.coupling = v * inv_weights.asDiagonal() * u.transpose();
  ops.projection_psi = u * proj_weights.asDiagonal() * u.transpose();
  ops.residual_map = (Eigen::MatrixXd::Identity(n, n) - ops.projection_psi) * resid_x;
  ops.orthogonalized = true;
  return ops;
}

OrthoOperators plain_operators(const SplineDesign& design, const StepBasis& basis) {
  check_shapes(design, basis);
  const auto n = design.size();
  OrthoOperators ops;
  ops.delta = 0.0;
  ops.projection_x = Eigen::MatrixXd::Zero(n, n);
  ops.psi_star = basis.psi;
  ops.projection_psi = Eigen::MatrixXd::Zero(n, n);
  ops.coupling = Eigen::MatrixXd::Zero(n - 1, n);
  ops.residual_map = Eigen::MatrixXd::Identity(n, n);
  ops.smallest_singular = Eigen::JacobiSVD<Eigen::MatrixXd>(basis.psi).singularValues().minCoeff();
  ops.orthogonalized = false;
  return ops;
}

void Priors::validate() const {
  for (const double v : {lambda2_shape, lambda2_rate, omega_shape, omega_rate}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("prior hyperparameters must be positive and finite");
  }
}

Priors anchored_priors(double lambda_hat, double omega_hat, double sigma2_hat, double shape) {
  if (!(lambda_hat > 0.0) || !(omega_hat > 0.0) || !(sigma2_hat > 0.0) || !(shape > 0.0)) {
    throw InputError("prior anchors must be positive");
  }
  const double lambda2_mean = std::pow(lambda_hat / (2.0 * std::sqrt(sigma2_hat)), 2);
  const double omega_mean = omega_hat / sigma2_hat;
  Priors p;
  p.lambda2_shape = shape;
  p.lambda2_rate = shape / lambda2_mean;
  p.omega_shape = shape;
  p.omega_rate = shape / omega_mean;
  p.validate();
  return p;
}

GibbsModel::GibbsModel(Eigen::VectorXd y, const SplineDesign& design, const StepBasis& basis, OrthoOperators ops)
    : y_(std::move(y)), design_(&design), basis_(&basis), ops_(std::move(ops)) {
  check_shapes(design, basis);
  if (y_.size() != design.size()) throw InputError("series length does not match the spline design");
  if (!y_.allFinite()) throw InputError("series contains non-finite values");

  const Eigen::MatrixXd& x = design.trend;
  xtx_inv_ = (x.transpose() * x).inverse();
  xtx_inv_chol_ = Eigen::LLT<Eigen::Matrix2d>(xtx_inv_).matrixL();

  psi_gram_ = ops_.psi_star.transpose() * ops_.psi_star;

  const SpdFactor k = factor_spd(design.covariance, "GP covariance", JitterLog::info);
  k_chol_ = k.llt.matrixL();
  k_jitter_ = k.jitter;

  h_white_ = ops_.residual_map * k_chol_;
  h_white_gram_ = h_white_.transpose() * h_white_;
  if (ops_.orthogonalized) j_white_ = ops_.coupling * k_chol_;
}

Eigen::VectorXd GibbsModel::residual(const MCMCState& s) const {
  return y_ - signal(s);
}

Eigen::VectorXd GibbsModel::signal(const MCMCState& s) const {
  Eigen::VectorXd out = design_->trend * s.beta_star + ops_.psi_star * s.gamma_star;
  if (ops_.orthogonalized) {
    out.noalias() += ops_.residual_map * s.g;
  } else {
    out += s.g;
  }
  return out;
}

double GibbsModel::g_quadratic(const Eigen::VectorXd& g) const {
  return k_chol_.triangularView<Eigen::Lower>().solve(g).squaredNorm();
}

double GibbsModel::sigma2_conditional_rate(const MCMCState& s) const {
  Eigen::VectorXd dev = s.gamma_star;
  if (ops_.orthogonalized) dev.noalias() -= ops_.coupling * s.g;
  const double prior_term = (dev.array().square() / s.tau2.array()).sum();
  return 0.5 * residual(s).squaredNorm() + 0.5 * prior_term;
}

void GibbsModel::update_sigma2(MCMCState& s, Random& rng) const {
  const double shape = (2.0 * static_cast<double>(n()) - 1.0) / 2.0;
  s.sigma2 = rng.inverse_gamma(shape, sigma2_conditional_rate(s));
}

Eigen::VectorXd GibbsModel::beta_conditional_mean(const MCMCState& s) const {
  Eigen::VectorXd target = y_ - ops_.psi_star * s.gamma_star;
  if (ops_.orthogonalized) {
    target.noalias() -= ops_.residual_map * s.g;
  } else {
    target -= s.g;
  }
  return xtx_inv_ * (design_->trend.transpose() * target);
}

void GibbsModel::update_beta(MCMCState& s, Random& rng) const {
  const Eigen::Vector2d z(rng.normal(), rng.normal());
  s.beta_star = beta_conditional_mean(s) + std::sqrt(s.sigma2) * (xtx_inv_chol_ * z);
}

namespace {

struct GammaSystem {
  Eigen::MatrixXd precision;
  Eigen::VectorXd rhs;
};

}  // namespace

static GammaSystem gamma_system(const GibbsModel& m, const Eigen::MatrixXd& psi_gram, const MCMCState& s) {
  const auto& ops = m.ops();
  GammaSystem sys;
  sys.precision = psi_gram;
  sys.precision.diagonal().array() += s.tau2.array().inverse();
  Eigen::VectorXd target = m.y() - m.design().trend * s.beta_star;
  if (ops.orthogonalized) {
    target.noalias() -= ops.residual_map * s.g;
  } else {
    target -= s.g;
  }
  sys.rhs = ops.psi_star.transpose() * target;
  if (ops.orthogonalized) {
    sys.rhs.array() += (ops.coupling * s.g).array() / s.tau2.array();
  }
  return sys;
}

Eigen::VectorXd GibbsModel::gamma_conditional_mean(const MCMCState& s) const {
  const GammaSystem sys = gamma_system(*this, psi_gram_, s);
  return factor_spd(sys.precision, "anomaly precision").solve(sys.rhs);
}

void GibbsModel::update_gamma(MCMCState& s, Random& rng) const {
  const GammaSystem sys = gamma_system(*this, psi_gram_, s);
  const SpdFactor f = factor_spd(sys.precision, "anomaly precision");
  Eigen::VectorXd draw = f.solve(sys.rhs);
  const Eigen::VectorXd z = rng.normal(draw.size());
  draw += std::sqrt(s.sigma2) * f.llt.matrixU().solve(z);
  s.gamma_star = std::move(draw);
}

void GibbsModel::update_tau2(MCMCState& s, Random& rng) const {
  Eigen::VectorXd dev = s.gamma_star;
  if (ops_.orthogonalized) dev.noalias() -= ops_.coupling * s.g;
  const double scale = std::sqrt(s.lambda2 * s.sigma2);
  for (Eigen::Index j = 0; j < dev.size(); ++j) {
    const double mean = scale / std::abs(dev(j));
    double tau2 = kTauFloor;
    if (std::isfinite(mean)) {
      const double precision = sample_inverse_gaussian(mean, s.lambda2, rng);
      tau2 = 1.0 / std::max(precision, std::numeric_limits<double>::min());
    }
    if (!(tau2 >= kTauFloor)) {
      tau2 = kTauFloor;
      ++s.tau_clamps;
    }
    s.tau2(j) = tau2;
  }
}

void GibbsModel::update_lambda2(MCMCState& s, const Priors& priors, Random& rng) const {
  const double shape = priors.lambda2_shape + static_cast<double>(s.tau2.size());
  const double rate = priors.lambda2_rate + 0.5 * s.tau2.sum();
  s.lambda2 = rng.gamma(shape, rate);
}

void GibbsModel::update_g(MCMCState& s, Random& rng) const {
  const auto nn = n();
  const double inv_s2 = 1.0 / s.sigma2;

  Eigen::MatrixXd precision = h_white_gram_ * inv_s2;
  precision.diagonal().array() += s.omega;

  Eigen::VectorXd target = y_ - design_->trend * s.beta_star - ops_.psi_star * s.gamma_star;
  Eigen::VectorXd rhs = h_white_.transpose() * target;

  if (ops_.orthogonalized) {
    const Eigen::VectorXd inv_tau = s.tau2.array().rsqrt().matrix();
    const Eigen::MatrixXd scaled = inv_tau.asDiagonal() * j_white_;
    precision.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose(), inv_s2);
    precision.triangularView<Eigen::StrictlyUpper>() = precision.transpose();
    rhs.noalias() += j_white_.transpose() * (s.gamma_star.array() / s.tau2.array()).matrix();
  }
  rhs *= inv_s2;

  const SpdFactor f = factor_spd(precision, "GP precision");
  Eigen::VectorXd u = f.solve(rhs);
  u += f.llt.matrixU().solve(rng.normal(nn));
  s.g = k_chol_.triangularView<Eigen::Lower>() * u;
}

void GibbsModel::update_omega(MCMCState& s, const Priors& priors, Random& rng) const {
  const double shape = 0.5 * static_cast<double>(n()) + priors.omega_shape;
  const double rate = 0.5 * g_quadratic(s.g) + priors.omega_rate;
  s.omega = rng.gamma(shape, rate);
}

NaturalDraw GibbsModel::back_transform(const MCMCState& s) const {
  NaturalDraw d;
  if (!ops_.orthogonalized) {
    d.beta = s.beta_star;
    d.gamma = s.gamma_star;
    return d;
  }
  d.gamma = s.gamma_star - ops_.coupling * s.g;
  const Eigen::VectorXd extra = basis_->psi * d.gamma + s.g;
  d.beta = s.beta_star - xtx_inv_ * (design_->trend.transpose() * extra);
  return d;
}

MCMCState init_state(const GibbsModel& model, const Priors& priors) {
  priors.validate();
  const auto n = model.n();
  const Eigen::VectorXd& y = model.y();

  std::vector<double> jumps(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i + 1 < n; ++i) jumps[static_cast<std::size_t>(i)] = std::abs(y(i + 1) - y(i));
  const double cut = quantile(jumps, 0.95);

  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(n - 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double z = jumps[static_cast<std::size_t>(i)];
    if (z >= cut) gamma(i) = z;
  }

  const Eigen::MatrixXd& x = model.design().trend;
  const Eigen::Matrix2d xtx_inv = (x.transpose() * x).inverse();
  const Eigen::VectorXd psi_gamma = model.basis().psi * gamma;
  const Eigen::VectorXd beta = xtx_inv * (x.transpose() * (y - psi_gamma));

  MCMCState s;
  s.g = Eigen::VectorXd::Zero(n);
  s.gamma_star = gamma;
  s.beta_star = model.ops().orthogonalized ? Eigen::VectorXd(beta + xtx_inv * (x.transpose() * psi_gamma))
                                           : Eigen::VectorXd(beta);
  s.lambda2 = priors.lambda2_shape / priors.lambda2_rate;
  s.omega = priors.omega_shape / priors.omega_rate;
  s.tau2 = Eigen::VectorXd::Constant(n - 1, 2.0 / s.lambda2);
  s.sigma2 = std::numeric_limits<double>::quiet_NaN();
  return s;
}

void gibbs_step(MCMCState& state, const GibbsModel& model, const Priors& priors, Random& rng,
                const GibbsControls& controls) {
  if (!controls.fix_sigma2) model.update_sigma2(state, rng);
  if (!(state.sigma2 > 0.0) || !std::isfinite(state.sigma2)) {
    throw NumericalError("sigma^2 left the positive reals");
  }
  if (!controls.fix_beta) model.update_beta(state, rng);
  if (!controls.fix_gamma) model.update_gamma(state, rng);
  if (!controls.fix_tau2) model.update_tau2(state, rng);
  if (!controls.fix_lambda2) model.update_lambda2(state, priors, rng);
  if (!controls.fix_g) model.update_g(state, rng);
  if (!controls.fix_omega) model.update_omega(state, priors, rng);
}

void ChainConfig::validate() const {
  if (chains < 1) throw InputError("at least one chain is required");
  if (iterations < 1 || burnin < 0 || burnin >= iterations) {
    throw InputError("iterations must exceed the burn-in");
  }
  if (thin < 1) throw InputError("thinning must be at least 1");
}

std::size_t PosteriorSamples::healthy_chains() const {
  return static_cast<std::size_t>(std::count_if(chains.begin(), chains.end(), [](const auto& c) { return !c.failed; }));
}

namespace {

Eigen::MatrixXd pool(const std::vector<ChainSamples>& chains, Eigen::MatrixXd ChainSamples::*member) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const auto& c : chains) {
    if (c.failed) continue;
    rows = (c.*member).rows();
    cols += (c.*member).cols();
  }
  Eigen::MatrixXd out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& c : chains) {
    if (c.failed) continue;
    out.middleCols(at, (c.*member).cols()) = c.*member;
    at += (c.*member).cols();
  }
  return out;
}

ParameterDiagnostics scalar_diagnostics(const std::vector<ChainSamples>& chains,
                                        std::vector<double> ChainSamples::*member) {
  ChainDraws draws;
  for (const auto& c : chains) {
    if (!c.failed) draws.push_back(c.*member);
  }
  ParameterDiagnostics d;
  if (draws.empty() || draws.front().size() < 4) {
    d.ess = std::numeric_limits<double>::quiet_NaN();
    d.rhat = std::numeric_limits<double>::quiet_NaN();
    return d;
  }
  d.ess = effective_sample_size(draws);
  d.rhat = split_rhat(draws);
  return d;
}

ChainSamples run_chain(const GibbsModel& model, const Priors& priors, const ChainConfig& config, int chain) {
  ChainSamples out;
  const auto n = model.n();
  const auto keep = config.retained();
  out.beta.resize(2, keep);
  out.gamma.resize(n - 1, keep);
  out.g.resize(n, keep);
  out.sigma2.reserve(static_cast<std::size_t>(keep));
  out.lambda2.reserve(static_cast<std::size_t>(keep));
  out.omega.reserve(static_cast<std::size_t>(keep));
  if (config.keep_raw) {
    out.beta_star.resize(2, keep);
    out.gamma_star.resize(n - 1, keep);
  }

  Random rng(derive_seed(config.seed, static_cast<std::uint64_t>(chain)));
  MCMCState state = init_state(model, priors);
  try {
    Eigen::Index col = 0;
    for (int it = 0; it < config.iterations; ++it) {
      gibbs_step(state, model, priors, rng);
      if (it < config.burnin || (it - config.burnin) % config.thin != 0) continue;
      const NaturalDraw d = model.back_transform(state);
      out.beta.col(col) = d.beta;
      out.gamma.col(col) = d.gamma;
      out.g.col(col) = state.g;
      out.sigma2.push_back(state.sigma2);
      out.lambda2.push_back(state.lambda2);
      out.omega.push_back(state.omega);
      if (config.keep_raw) {
        out.beta_star.col(col) = state.beta_star;
        out.gamma_star.col(col) = state.gamma_star;
      }
      ++col;
    }
  } catch (const NumericalError& e) {
    out.failed = true;
    out.error = e.what();
    spdlog::warn("chain {} failed: {}", chain, e.what());
  }
  out.tau_clamps = state.tau_clamps;
  if (state.tau_clamps > 0) spdlog::debug("chain {}: {} tau^2 draws clamped", chain, state.tau_clamps);
  return out;
}

}  // namespace

Eigen::MatrixXd PosteriorSamples::pooled_gamma() const { return pool(chains, &ChainSamples::gamma); }
Eigen::MatrixXd PosteriorSamples::pooled_g() const { return pool(chains, &ChainSamples::g); }
Eigen::MatrixXd PosteriorSamples::pooled_beta() const { return pool(chains, &ChainSamples::beta); }

double PosteriorSamples::min_scalar_ess() const {
  return std::min({sigma2.ess, lambda2.ess, omega.ess});
}

PosteriorSamples run_chains(const GibbsModel& model, const Priors& priors, const ChainConfig& config) {
  config.validate();
  priors.validate();
  PosteriorSamples out;
  out.config = config;
  out.chains.resize(static_cast<std::size_t>(config.chains));
  parallel_for(out.chains.size(), config.threads, [&](std::size_t c) {
    out.chains[c] = run_chain(model, priors, config, static_cast<int>(c));
  });
  if (out.healthy_chains() == 0) {
    throw NumericalError("every chain failed: " + out.chains.front().error);
  }
  out.sigma2 = scalar_diagnostics(out.chains, &ChainSamples::sigma2);
  out.lambda2 = scalar_diagnostics(out.chains, &ChainSamples::lambda2);
  out.omega = scalar_diagnostics(out.chains, &ChainSamples::omega);
  return out;
}

}  // namespace hs
