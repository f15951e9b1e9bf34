// Acceptance checks. Each check prints one PASS/FAIL line with the measured
// quantities; `--only name[,name...]` restricts the run, `--list` prints the
// names. Exit status is nonzero if any selected check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "hybridsmooth/hybridsmooth.hpp"
#include "oracles.hpp"

using namespace hs;
namespace ht = hs::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Check {
  std::string name;
  std::function<Outcome()> run;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Eigen::VectorXd with_noise(Eigen::VectorXd y, double sd, std::mt19937_64& eng) {
  std::normal_distribution<double> noise(0.0, sd);
  for (auto& v : y) v += noise(eng);
  return y;
}

// ----------------------------------------------------------------------------

Outcome reduction_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index n = 30;
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n, 0, 1);
  const auto design = build_design(t);
  const auto basis = step_basis(n, BasisVariant::forward);
  std::mt19937_64 eng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int inst = 0; inst < 25; ++inst) {
    Eigen::VectorXd y = ht::random_smooth(t, 1000 + inst);
    const int steps = inst % 3;
    for (int k = 0; k < steps; ++k) {
      const auto at = static_cast<Eigen::Index>(3 + unit(eng) * (n - 6));
      const double size = (unit(eng) < 0.5 ? -1.0 : 1.0) * (0.5 + unit(eng));
      y.tail(n - at).array() += size;
    }
    y = with_noise(y, 0.05, eng);
    const double omega = std::pow(10.0, -6.0 + 3.0 * unit(eng));
    HybridProblem problem(y, design, basis);
    const auto reduced = problem.reduced(omega);
    const double lambda = (0.01 + 0.4 * unit(eng)) * kkt_zero_threshold(reduced);
    const auto fit = problem.solve(reduced, lambda, omega, {1e-10, 200000});
    const auto block = ht::alternating_block_solver(y, design, basis, lambda, omega, 1e-10);
    const double mine = ht::joint_objective(y, design, basis, fit.c_hat, fit.gamma_hat, lambda, omega);
    worst = std::max(worst, std::abs(mine - block.objective) / std::abs(block.objective));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 10.0, fmt("max relative objective gap %.3g over 25 instances, %.2f s", worst, secs)};
}

Outcome spline_gp_identity() {
  std::mt19937_64 eng(202);
  std::uniform_int_distribution<int> size(20, 200);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    const int n = size(eng);
    std::vector<double> raw(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (auto& v : raw) v = (acc += 0.2 + unit(eng));
    const TimeSeries ts(raw, std::vector<double>(raw.size(), 0.0));
    const Eigen::VectorXd t = standardize_times(ts).series.times_vector();
    const Eigen::VectorXd y = with_noise(ht::random_smooth(t, 2000 + inst), 0.1, eng);
    const double omega = std::pow(10.0, -7.0 + 5.0 * unit(eng));
    const auto design = build_design(t);
    const Eigen::VectorXd fit = spline_fit(y, design, omega);
    const Eigen::VectorXd blue = ht::gp_blue(y, t, omega);
    const double range = y.maxCoeff() - y.minCoeff();
    worst = std::max(worst, (fit - blue).cwiseAbs().maxCoeff() / range);
  }
  return {worst <= 1e-6, fmt("max gap / range(y) = %.3g over 10 instances", worst)};
}

Outcome fista_correctness() {
  std::mt19937_64 eng(303);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  bool zeros = true;
  for (int inst = 0; inst < 25; ++inst) {
    const auto n = static_cast<Eigen::Index>(15 + 25 * unit(eng));
    const auto p = static_cast<Eigen::Index>(4 + 12 * unit(eng));
    Eigen::MatrixXd x(n, p);
    for (auto& v : x.reshaped()) v = normal(eng);
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(p);
    for (Eigen::Index j = 0; j < p; j += 3) truth(j) = 2.0 * normal(eng);
    Eigen::VectorXd y = x * truth;
    for (auto& v : y) v += 0.5 * normal(eng);
    const auto gram = lasso_gram(x, y);
    const double top = kkt_zero_threshold(gram);
    const double lambda = (0.005 + 0.6 * unit(eng)) * top;
    const auto fit = fista(gram, lambda, Eigen::VectorXd::Zero(p), {1e-12, 500000});
    const Eigen::VectorXd cd = ht::lasso_coordinate_descent(x, y, lambda);
    worst = std::max(worst, (fit.gamma - cd).cwiseAbs().maxCoeff());
    for (double factor : {1.0, 1.5, 10.0}) {
      const auto zero = fista(gram, factor * top, Eigen::VectorXd::Zero(p), {1e-12, 500000});
      zeros = zeros && (zero.gamma.array() == 0.0).all();
    }
  }
  // The same property on the whitened problem of a cycle.
  const auto ts = ht::reference_cycle();
  const auto design = ht::unit_design(ts);
  const auto basis = step_basis(300, BasisVariant::forward);
  HybridProblem problem(ts.values_vector(), design, basis);
  for (double omega : {1e-8, 1e-5}) {
    const auto reduced = problem.reduced(omega);
    const auto fit = problem.solve(reduced, kkt_zero_threshold(reduced), omega);
    zeros = zeros && (fit.gamma_hat.array() == 0.0).all();
  }
  return {worst <= 1e-6 && zeros,
          fmt("max |fista - cd| = %.3g over 25 instances; exact zeros at lambda >= KKT threshold: %s", worst,
              zeros ? "yes" : "no")};
}

Outcome degrees_of_freedom() {
  const Eigen::Index n = 100;
  const auto design = build_design(Eigen::VectorXd::LinSpaced(n, 0, 1));
  bool decreasing = true;
  double previous = std::numeric_limits<double>::infinity();
  double first = 0.0;
  double last = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double omega = std::pow(10.0, -12.0 + 20.0 * k / 19.0);
    const double edf = hat_trace(design, omega);
    decreasing = decreasing && edf < previous;
    previous = edf;
    if (k == 0) first = edf;
    last = edf;
  }
  const bool limits = std::abs(first - static_cast<double>(n)) <= 0.05 && std::abs(last - 2.0) <= 0.05;
  return {decreasing && limits,
          fmt("strictly decreasing on 1e-12..1e8: %s; H1 = %.6f (n = %d) and %.6f", decreasing ? "yes" : "no", first,
              static_cast<int>(n), last)};
}

Outcome scale_mixture_identity() {
  bool pass = true;
  std::ostringstream detail;
  detail << "KS p-values:";
  int setting = 0;
  for (auto [sigma2, lambda2] : {std::pair{1.0, 1.0}, {0.01, 4.0}, {0.25, 50.0}}) {
    Random rng(derive_seed(404, static_cast<std::uint64_t>(setting++)));
    std::vector<double> draws(100000);
    for (auto& g : draws) {
      const double tau2 = rng.exponential(lambda2 / 2.0);
      g = std::sqrt(sigma2 * tau2) * rng.normal();
    }
    const double scale = std::sqrt(sigma2 / lambda2);
    const double p = ht::ks_pvalue(draws, [&](double x) { return ht::laplace_cdf(x, scale); });
    pass = pass && p > 0.01;
    detail << fmt(" (s2=%g, l2=%g) %.3f", sigma2, lambda2, p);
  }
  return {pass, detail.str()};
}

Outcome inverse_gaussian_sampler() {
  bool pass = true;
  std::ostringstream detail;
  detail << "relative errors (mean, var):";
  int setting = 0;
  for (auto [mu, shape] : {std::pair{1.0, 1.0}, {0.25, 4.0}, {5.0, 2.0}}) {
    Random rng(derive_seed(505, static_cast<std::uint64_t>(setting++)));
    const int count = 1000000;
    double s = 0.0;
    double ss = 0.0;
    for (int i = 0; i < count; ++i) {
      const double x = sample_inverse_gaussian(mu, shape, rng);
      s += x;
      ss += x * x;
    }
    const double mean = s / count;
    const double var = ss / count - mean * mean;
    const double em = std::abs(mean / mu - 1.0);
    const double ev = std::abs(var / (mu * mu * mu / shape) - 1.0);
    pass = pass && em < 0.01 && ev < 0.03;
    detail << fmt(" (mu=%g, shape=%g) %.4f %.4f", mu, shape, em, ev);
  }
  return {pass, detail.str()};
}

struct BayesRun {
  DetectionReport report;
  double seconds = 0.0;
};

BayesRun bayes_on(const TimeSeries& ts, std::uint64_t chain_seed, const ChainConfig& chains = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto design = ht::unit_design(ts);
  const auto basis = step_basis(static_cast<Eigen::Index>(ts.size()), BasisVariant::centered);
  BayesSettings settings;
  settings.chains = chains;
  settings.chains.seed = chain_seed;
  const auto analysis = analyze_bayes(ts.values_vector(), design, basis, settings);
  BayesRun run;
  run.report = detect_bayes(analysis.samples, basis, ts.times_vector(), 0.15, 0.95);
  run.seconds = seconds_since(t0);
  return run;
}

Outcome bayes_recovery() {
  int hits = 0;
  double slowest = 0.0;
  std::ostringstream means;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto ts = ht::reference_cycle(derive_seed(707, r));
    const auto run = bayes_on(ts, derive_seed(708, r));
    slowest = std::max(slowest, run.seconds);
    for (const auto& c : run.report.coefficients) {
      if (c.index != 150) continue;
      const bool excludes = c.lower > 0.0 || c.upper < 0.0;
      if (excludes && std::abs(c.estimate) > 0.15) ++hits;
      means << fmt(" %.2f", c.estimate);
    }
  }
  return {hits >= 19 && slowest < 300.0,
          fmt("%d/20 replicates recover the step; slowest replicate %.1f s; posterior means:", hits, slowest) +
              means.str()};
}

Outcome null_calibration() {
  int clean = 0;
  std::ostringstream flagged;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto ts = ht::reference_cycle(derive_seed(808, r), 0.0, 0.1);
    const auto run = bayes_on(ts, derive_seed(809, r));
    const auto f = run.report.flagged_indices();
    if (f.empty()) {
      ++clean;
    } else {
      flagged << " [" << r << ":";
      for (auto i : f) flagged << ' ' << i;
      flagged << ']';
    }
  }
  return {clean >= 19, fmt("%d/20 null replicates flag nothing", clean) + flagged.str()};
}

Outcome detection_surface_shape() {
  StudyConfig config;
  config.methods = {StudyMethod::hybrid_elbow, StudyMethod::hybrid_aicc, StudyMethod::bayes};
  config.replicates = 20;
  config.seed = 909;
  config.bayes.chains.chains = 1;
  config.bayes.chains.iterations = 1000;
  config.bayes.chains.burnin = 200;
  const auto t0 = std::chrono::steady_clock::now();
  const auto surfaces = detection_surfaces(config);
  const double secs = seconds_since(t0);
  const auto& elbow = surfaces[0];
  const auto& aicc = surfaces[1];
  const auto& bayes = surfaces[2];
  const auto ns = config.sizes.size();
  const auto ng = config.sigmas.size();

  std::ostringstream detail;
  auto table = [&](const DetectionSurface& s) {
    detail << "\n    " << to_string(s.method) << ":";
    for (std::size_t ig = 0; ig < ng; ++ig) {
      detail << " sigma=" << config.sigmas[ig] << " [";
      for (std::size_t is = 0; is < ns; ++is) detail << (is ? " " : "") << s.cell(is, ig).detections;
      detail << "]";
    }
  };

  // (a) no significant decreasing trend in size at any sigma, any method.
  bool monotone = true;
  double min_z = std::numeric_limits<double>::infinity();
  for (const auto* s : {&elbow, &aicc, &bayes}) {
    for (std::size_t ig = 0; ig < ng; ++ig) {
      std::vector<std::size_t> k;
      std::vector<std::size_t> n;
      for (std::size_t is = 0; is < ns; ++is) {
        k.push_back(s->cell(is, ig).detections);
        n.push_back(s->cell(is, ig).total);
      }
      const double z = ht::cochran_armitage_z(k, n);
      if (std::isfinite(z)) min_z = std::min(min_z, z);
      if (z < -1.6448536269514722) monotone = false;
    }
  }

  // (b) each method's rate lies inside the other's Wilson 95% interval.
  bool agree = true;
  int disagreements = 0;
  for (std::size_t is = 0; is < ns; ++is) {
    for (std::size_t ig = 0; ig < ng; ++ig) {
      const auto& a = aicc.cell(is, ig);
      const auto& b = bayes.cell(is, ig);
      const auto ia = ht::wilson_interval(a.detections, a.total);
      const auto ib = ht::wilson_interval(b.detections, b.total);
      const bool ok = b.probability() >= ia.lower && b.probability() <= ia.upper && a.probability() >= ib.lower &&
                      a.probability() <= ib.upper;
      if (!ok) {
        agree = false;
        ++disagreements;
      }
    }
  }

  // (c) elbow below aicc at the smallest size and smallest sigma.
  const double pe = elbow.cell(0, 0).probability();
  const double pa = aicc.cell(0, 0).probability();
  const bool floor = pe < pa;

  table(elbow);
  table(aicc);
  table(bayes);
  return {monotone && agree && floor,
          fmt("(a) monotone: %s (min trend z %.2f); (b) aicc/bayes agree: %s (%d cells outside); "
              "(c) elbow %.2f < aicc %.2f: %s; %.0f s",
              monotone ? "yes" : "no", min_z, agree ? "yes" : "no", disagreements, pe, pa, floor ? "yes" : "no",
              secs) +
              detail.str()};
}

Outcome orthogonalization_invariants() {
  const auto ts = ht::reference_cycle();
  const auto design = ht::unit_design(ts);
  const auto basis = step_basis(300, BasisVariant::centered);
  const auto ops = orthogonalize(design, basis);
  const auto& x = design.trend;
  const double px = (ops.projection_x * ops.psi_star).cwiseAbs().maxCoeff();
  const double hx = (ops.residual_map * x).cwiseAbs().maxCoeff();

  const GibbsModel model(ts.values_vector(), design, basis, ops);
  ChainConfig cfg;
  cfg.chains = 1;
  cfg.iterations = 1000;
  cfg.burnin = 0;
  cfg.keep_raw = true;
  cfg.seed = 1010;
  const auto post = run_chains(model, Priors{}, cfg);
  const auto& ch = post.chains.front();
  double gap = 0.0;
  for (Eigen::Index k = 0; k < ch.gamma.cols(); ++k) {
    const Eigen::VectorXd natural = x * ch.beta.col(k) + basis.psi * ch.gamma.col(k) + ch.g.col(k);
    const Eigen::VectorXd raw =
        x * ch.beta_star.col(k) + ops.psi_star * ch.gamma_star.col(k) + ops.residual_map * ch.g.col(k);
    gap = std::max(gap, (natural - raw).cwiseAbs().maxCoeff());
  }
  return {!ch.failed && px <= 1e-10 && hx <= 1e-10 && gap <= 1e-6,
          fmt("|P_X Psi*| = %.2g, |H X| = %.2g, reassembly gap %.2g over %d draws", px, hx, gap,
              static_cast<int>(ch.gamma.cols()))};
}

Outcome mixing_benefit() {
  const auto ts = ht::reference_cycle();
  const auto design = ht::unit_design(ts);
  const auto basis = step_basis(300, BasisVariant::centered);
  const Eigen::VectorXd y = ts.values_vector();
  const auto hybrid = analyze_hybrid(y, design, step_basis(300, BasisVariant::forward));
  const Priors priors = hybrid_anchored_priors(hybrid);
  ChainConfig cfg;
  cfg.seed = 1111;

  auto min_ess = [&](OrthoOperators ops, ParameterDiagnostics (&out)[3]) {
    const GibbsModel model(y, design, basis, std::move(ops));
    const auto post = run_chains(model, priors, cfg);
    out[0] = post.sigma2;
    out[1] = post.lambda2;
    out[2] = post.omega;
    return post.min_scalar_ess();
  };
  ParameterDiagnostics ortho[3];
  ParameterDiagnostics plain[3];
  const double eo = min_ess(orthogonalize(design, basis), ortho);
  const double ep = min_ess(plain_operators(design, basis), plain);
  const double ratio = eo / ep;
  return {ratio >= 5.0, fmt("min ESS orthogonalized %.1f (s2 %.0f, l2 %.0f, w %.0f) vs plain %.1f "
                            "(s2 %.0f, l2 %.0f, w %.0f); ratio %.2f",
                            eo, ortho[0].ess, ortho[1].ess, ortho[2].ess, ep, plain[0].ess, plain[1].ess,
                            plain[2].ess, ratio)};
}

Outcome relative_runtime() {
  const auto ts = ht::reference_cycle();
  const auto design = ht::unit_design(ts);
  const Eigen::VectorXd y = ts.values_vector();
  HybridSettings hs;
  hs.grid.threads = 1;
  auto t0 = std::chrono::steady_clock::now();
  const auto hybrid = analyze_hybrid(y, design, step_basis(300, hs.basis), hs);
  const double hybrid_secs = seconds_since(t0);

  BayesSettings bs;
  bs.priors = hybrid_anchored_priors(hybrid);
  bs.chains.threads = 1;
  const auto centered = step_basis(300, BasisVariant::centered);
  t0 = std::chrono::steady_clock::now();
  (void)analyze_bayes(y, design, centered, bs);
  const double bayes_secs = seconds_since(t0);
  const double ratio = bayes_secs / hybrid_secs;
  return {ratio >= 5.0, fmt("hybrid %.2f s, bayes sampler %.2f s (4 x 1000 sweeps), ratio %.1f", hybrid_secs,
                            bayes_secs, ratio)};
}

Outcome cycle_separation() {
  Random rng(1313);
  const auto s = synthetic_stream({}, rng);
  const auto config = default_separation_config();
  const auto cycles = separate_cycles(s.stream, config);
  std::size_t worst = 0;
  bool idempotent = true;
  auto gap = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
  if (cycles.size() == s.cycles.size()) {
    for (std::size_t k = 0; k < cycles.size(); ++k) {
      const auto start = cycles[k].source_offset;
      const auto end = start + cycles[k].series.size();
      worst = std::max({worst, gap(start, s.cycles[k].start), gap(end, s.cycles[k].end)});
      const auto once = trim_cycle(cycles[k], config);
      idempotent = idempotent && trim_cycle(once, config) == once;
      worst = std::max({worst, gap(once.source_offset + once.phase.start, s.running[k].start),
                        gap(once.source_offset + once.phase.end, s.running[k].end)});
    }
  }
  const bool found = cycles.size() == s.cycles.size();
  return {found && worst <= 2 && idempotent,
          fmt("%d of %d cycles found; max boundary error %d samples; trim idempotent: %s",
              static_cast<int>(cycles.size()), static_cast<int>(s.cycles.size()), static_cast<int>(worst),
              idempotent ? "yes" : "no")};
}

const std::vector<Check>& checks() {
  static const std::vector<Check> all{
      {"reduction_equivalence", reduction_equivalence},
      {"spline_gp_identity", spline_gp_identity},
      {"fista_correctness", fista_correctness},
      {"degrees_of_freedom", degrees_of_freedom},
      {"scale_mixture_identity", scale_mixture_identity},
      {"inverse_gaussian_sampler", inverse_gaussian_sampler},
      {"bayes_recovery", bayes_recovery},
      {"null_calibration", null_calibration},
      {"detection_surface_shape", detection_surface_shape},
      {"orthogonalization_invariants", orthogonalization_invariants},
      {"mixing_benefit", mixing_benefit},
      {"relative_runtime", relative_runtime},
      {"cycle_separation", cycle_separation},
  };
  return all;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--list") {
      for (const auto& c : checks()) std::cout << c.name << '\n';
      return 0;
    }
    if (arg == "--only" && i + 1 < argc) {
      only = split(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--list] [--only name[,name...]]\n";
      return 2;
    }
  }
  for (const auto& name : only) {
    const bool known = std::any_of(checks().begin(), checks().end(), [&](const Check& c) { return c.name == name; });
    if (!known) {
      std::cerr << "unknown check '" << name << "'\n";
      return 2;
    }
  }

  int failures = 0;
  for (const auto& c : checks()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
