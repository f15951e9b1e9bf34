#include "hybridsmooth/analysis.hpp"

#include "hybridsmooth/errors.hpp"

namespace hs {

HybridAnalysis analyze_hybrid(const Eigen::VectorXd& y, const SplineDesign& design, const StepBasis& basis,
                              const HybridSettings& settings) {
  HybridAnalysis a;
  auto omegas = default_omegas(design, settings.omega_points);
  const HybridProblem problem(y, design, basis);
  auto lambdas = default_lambdas(problem, omegas.back(), settings.lambda_points);
  a.grid = grid_search(y, design, basis, std::move(lambdas), std::move(omegas), settings.grid);
  a.elbow = elbow_select(a.grid);
  a.aicc = aicc_select(a.grid);
  const auto& e = a.grid.cell(a.elbow.lambda_index, a.elbow.omega_index);
  const auto& c = a.grid.cell(a.aicc.lambda_index, a.aicc.omega_index);
  a.elbow_fit = problem.back_substitute(e.gamma, e.lambda, e.omega);
  a.elbow_fit.iterations = e.iterations;
  a.elbow_fit.converged = e.converged;
  a.aicc_fit = problem.back_substitute(c.gamma, c.lambda, c.omega);
  a.aicc_fit.iterations = c.iterations;
  a.aicc_fit.converged = c.converged;
  return a;
}

Priors hybrid_anchored_priors(const HybridAnalysis& hybrid) {
  const auto& fit = hybrid.aicc_fit;
  const double n = static_cast<double>(fit.residual.size());
  const double dof = n - fit.edf_total;
  const double sse = fit.residual.squaredNorm();
  if (!(dof > 0.0) || !(sse > 0.0)) return Priors{};
  return anchored_priors(fit.lambda, fit.omega, sse / dof);
}

BayesAnalysis analyze_bayes(const Eigen::VectorXd& y, const SplineDesign& design, const StepBasis& basis,
                            const BayesSettings& settings) {
  if (basis.variant != settings.basis) throw InputError("step basis variant does not match the Bayes settings");
  BayesAnalysis out;
  if (settings.priors) {
    out.priors = *settings.priors;
  } else if (settings.anchor_priors) {
    const StepBasis anchor_basis = step_basis(design.size(), settings.anchor.basis);
    out.priors = hybrid_anchored_priors(analyze_hybrid(y, design, anchor_basis, settings.anchor));
  }
  OrthoOperators ops =
      settings.orthogonalize ? orthogonalize(design, basis, settings.delta) : plain_operators(design, basis);
  const GibbsModel model(y, design, basis, std::move(ops));
  out.samples = run_chains(model, out.priors, settings.chains);
  return out;
}

}  // namespace hs
