#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace hs::testing {

Eigen::VectorXd gp_blue(const Eigen::VectorXd& y, const Eigen::VectorXd& times, double omega) {
  const auto n = y.size();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double m = std::min(times(i), times(j));
      const double big = std::max(times(i), times(j));
      k(i, j) = m * m * (3.0 * big - m) / 6.0;
    }
  }
  Eigen::MatrixXd x(n, 2);
  x.col(0).setOnes();
  x.col(1) = times;
  const Eigen::MatrixXd sigma = k + omega * Eigen::MatrixXd::Identity(n, n);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(sigma);
  const Eigen::MatrixXd si_x = lu.solve(x);
  const Eigen::VectorXd si_y = lu.solve(y);
  const Eigen::Vector2d beta = (x.transpose() * si_x).fullPivLu().solve(x.transpose() * si_y);
  const Eigen::VectorXd r = y - x * beta;
  return x * beta + k * lu.solve(r);
}

double natural_spline_energy(const Eigen::VectorXd& times, const Eigen::VectorXd& values) {
  // Segment k: a + b u + c u^2 + d u^3 with u = t - t_k.
  const auto n = times.size();
  const auto segs = n - 1;
  const auto unknowns = 4 * segs;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(unknowns, unknowns);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns);
  Eigen::Index row = 0;
  for (Eigen::Index k = 0; k < segs; ++k) {
    const double h = times(k + 1) - times(k);
    const auto o = 4 * k;
    a(row, o) = 1.0;
    rhs(row++) = values(k);
    a(row, o) = 1.0;
    a(row, o + 1) = h;
    a(row, o + 2) = h * h;
    a(row, o + 3) = h * h * h;
    rhs(row++) = values(k + 1);
    if (k + 1 < segs) {
      a(row, o + 1) = 1.0;
      a(row, o + 2) = 2.0 * h;
      a(row, o + 3) = 3.0 * h * h;
      a(row++, o + 5) = -1.0;
      a(row, o + 2) = 2.0;
      a(row, o + 3) = 6.0 * h;
      a(row++, o + 6) = -2.0;
    }
  }
  a(row++, 2) = 2.0;
  const double hl = times(n - 1) - times(n - 2);
  a(row, 4 * (segs - 1) + 2) = 2.0;
  a(row++, 4 * (segs - 1) + 3) = 6.0 * hl;
  const Eigen::VectorXd coef = a.fullPivLu().solve(rhs);
  double energy = 0.0;
  for (Eigen::Index k = 0; k < segs; ++k) {
    const double h = times(k + 1) - times(k);
    const double s0 = 2.0 * coef(4 * k + 2);
    const double s1 = s0 + 6.0 * coef(4 * k + 3) * h;
    energy += h * (s0 * s0 + s0 * s1 + s1 * s1) / 3.0;
  }
  return energy;
}

double kernel_by_quadrature(double s, double t, int panels) {
  const auto f = [&](double u) { return std::max(s - u, 0.0) * std::max(t - u, 0.0); };
  const double h = 1.0 / panels;
  double sum = f(0.0) + f(1.0);
  for (int i = 1; i < panels; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(i * h);
  return sum * h / 3.0;
}

Eigen::VectorXd lasso_coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                                         double tol, int max_sweeps) {
  const auto p = x.cols();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd r = y;
  const Eigen::VectorXd norms = x.colwise().squaredNorm();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double largest = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (norms(j) == 0.0) continue;
      const double rho = x.col(j).dot(r) + norms(j) * g(j);
      const double shrunk = std::copysign(std::max(std::abs(rho) - lambda / 2.0, 0.0), rho) / norms(j);
      const double move = shrunk - g(j);
      if (move != 0.0) {
        r -= move * x.col(j);
        g(j) = shrunk;
      }
      largest = std::max(largest, std::abs(move));
    }
    if (largest < tol) break;
  }
  return g;
}

double joint_objective(const Eigen::VectorXd& y, const SplineDesign& design, const StepBasis& basis,
                       const Eigen::VectorXd& c, const Eigen::VectorXd& gamma, double lambda, double omega) {
  const Eigen::VectorXd r = y - design.phi * c - basis.psi * gamma;
  return r.squaredNorm() + lambda * gamma.lpNorm<1>() + omega * c.dot(design.roughness * c);
}

BlockSolution alternating_block_solver(const Eigen::VectorXd& y, const SplineDesign& design, const StepBasis& basis,
                                       double lambda, double omega, double tol, int max_sweeps) {
  const Eigen::MatrixXd system = design.phi.transpose() * design.phi + omega * design.roughness;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
  BlockSolution s;
  s.gamma = Eigen::VectorXd::Zero(basis.cols());
  const Eigen::VectorXd norms = basis.psi.colwise().squaredNorm();
  s.c = ldlt.solve(design.phi.transpose() * y);
  double previous = joint_objective(y, design, basis, s.c, s.gamma, lambda, omega);
  for (s.sweeps = 1; s.sweeps <= max_sweeps; ++s.sweeps) {
    // One warm-started coordinate sweep over gamma, then the exact c block.
    Eigen::VectorXd r = y - design.phi * s.c - basis.psi * s.gamma;
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
      const double norm = norms(j);
      const double rho = basis.psi.col(j).dot(r) + norm * s.gamma(j);
      const double shrunk = std::copysign(std::max(std::abs(rho) - lambda / 2.0, 0.0), rho) / norm;
      const double move = shrunk - s.gamma(j);
      if (move != 0.0) {
        r -= move * basis.psi.col(j);
        s.gamma(j) = shrunk;
      }
    }
    s.c = ldlt.solve(design.phi.transpose() * (y - basis.psi * s.gamma));
    const double current = joint_objective(y, design, basis, s.c, s.gamma, lambda, omega);
    if (std::abs(previous - current) <= tol * std::abs(current)) {
      previous = current;
      break;
    }
    previous = current;
  }
  s.objective = previous;
  return s;
}

double ks_pvalue(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  // Stephens' small-sample adjustment of the Kolmogorov distribution.
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int j = 1; j <= 200; ++j) {
    p += 2.0 * ((j % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
  }
  return std::clamp(p, 0.0, 1.0);
}

double laplace_cdf(double x, double scale) {
  return x < 0.0 ? 0.5 * std::exp(x / scale) : 1.0 - 0.5 * std::exp(-x / scale);
}

namespace {

double log_choose(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

double fisher_less(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2) {
  // Hypergeometric tail: P(K2 <= k2) with the margins fixed.
  const std::size_t total = k1 + k2;
  const std::size_t n = n1 + n2;
  double p = 0.0;
  const std::size_t lo = total > n1 ? total - n1 : 0;
  for (std::size_t x = lo; x <= std::min(k2, total); ++x) {
    p += std::exp(log_choose(n2, x) + log_choose(n1, total - x) - log_choose(n, total));
  }
  return std::min(p, 1.0);
}

double cochran_armitage_z(const std::vector<std::size_t>& successes, const std::vector<std::size_t>& totals) {
  double n = 0.0;
  double k = 0.0;
  for (std::size_t i = 0; i < totals.size(); ++i) {
    n += static_cast<double>(totals[i]);
    k += static_cast<double>(successes[i]);
  }
  const double pbar = k / n;
  if (pbar == 0.0 || pbar == 1.0) return 0.0;
  double t = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < totals.size(); ++i) {
    const double score = static_cast<double>(i);
    const double ni = static_cast<double>(totals[i]);
    t += score * (static_cast<double>(successes[i]) - ni * pbar);
    s1 += ni * score;
    s2 += ni * score * score;
  }
  const double var = pbar * (1.0 - pbar) * (s2 - s1 * s1 / n);
  return t / std::sqrt(var);
}

Interval wilson_interval(std::size_t k, std::size_t n, double z) {
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double denom = 1.0 + z * z / nn;
  const double center = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

Eigen::VectorXd random_smooth(const Eigen::VectorXd& times, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double intercept = normal(eng);
  const double slope = normal(eng);
  Eigen::VectorXd out = (intercept + slope * times.array()).matrix();
  for (int k = 0; k < 3; ++k) {
    const double freq = 0.5 + 2.5 * unif(eng);
    const double phase = 2.0 * std::numbers::pi * unif(eng);
    const double amp = 0.5 * normal(eng);
    out.array() += amp * (2.0 * std::numbers::pi * freq * times.array() + phase).sin();
  }
  return out;
}

}  // namespace hs::testing
