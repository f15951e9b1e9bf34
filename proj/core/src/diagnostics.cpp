#include "hybridsmooth/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "hybridsmooth/errors.hpp"

namespace hs {

namespace {

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (const double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Autocovariance with 1/N normalization for lags 0..max_lag.
std::vector<double> autocovariance(const std::vector<double>& x, std::size_t max_lag) {
  const auto n = x.size();
  const double m = mean_of(x);
  std::vector<double> acov(max_lag + 1, 0.0);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - m) * (x[i + lag] - m);
    acov[lag] = s / static_cast<double>(n);
  }
  return acov;
}

void check_chains(const ChainDraws& chains) {
  if (chains.empty() || chains.front().size() < 4) throw InputError("diagnostics: need chains with at least 4 draws");
  for (const auto& c : chains) {
    if (c.size() != chains.front().size()) throw InputError("diagnostics: chains differ in length");
  }
}

// Within-chain variance W and pooled variance estimate var+.
struct VarianceParts {
  double within = 0.0;
  double pooled = 0.0;
};

VarianceParts variance_parts(const ChainDraws& chains) {
  const auto m = static_cast<double>(chains.size());
  const auto n = static_cast<double>(chains.front().size());
  double within = 0.0;
  double grand = 0.0;
  std::vector<double> means;
  for (const auto& c : chains) {
    const double mu = mean_of(c);
    means.push_back(mu);
    grand += mu;
    double ss = 0.0;
    for (const double v : c) ss += (v - mu) * (v - mu);
    within += ss / (n - 1.0);
  }
  within /= m;
  grand /= m;
  double between_over_n = 0.0;  // B / n
  if (chains.size() > 1) {
    for (const double mu : means) between_over_n += (mu - grand) * (mu - grand);
    between_over_n /= (m - 1.0);
  }
  return {within, within * (n - 1.0) / n + between_over_n};
}

}  // namespace

double effective_sample_size(const ChainDraws& chains) {
  check_chains(chains);
  const auto m = chains.size();
  const auto n = chains.front().size();
  const double total = static_cast<double>(m * n);

  const auto parts = variance_parts(chains);
  if (!(parts.pooled > 0.0)) return total;  // constant draws

  std::vector<std::vector<double>> acov;
  acov.reserve(m);
  for (const auto& c : chains) acov.push_back(autocovariance(c, n - 1));
  auto rho = [&](std::size_t lag) {
    double mean_acov = 0.0;
    for (const auto& a : acov) mean_acov += a[lag];
    mean_acov /= static_cast<double>(m);
    return 1.0 - (parts.within - mean_acov) / parts.pooled;
  };

  // Geyer: sum consecutive pairs while positive, forcing them monotone.
  double tau = -1.0;
  double previous_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (!(pair > 0.0)) break;
    pair = std::min(pair, previous_pair);
    previous_pair = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(total));
  return total / tau;
}

double split_rhat(const ChainDraws& chains) {
  check_chains(chains);
  const auto half = chains.front().size() / 2;
  ChainDraws split;
  for (const auto& c : chains) {
    split.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    split.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  const auto parts = variance_parts(split);
  if (!(parts.within > 0.0)) return 1.0;
  return std::sqrt(parts.pooled / parts.within);
}

}  // namespace hs
