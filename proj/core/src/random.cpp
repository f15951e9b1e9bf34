#include "hybridsmooth/random.hpp"

#include <cmath>

#include "hybridsmooth/errors.hpp"

namespace hs {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Eigen::VectorXd Random::normal(Eigen::Index n) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal_(engine_);
  return z;
}

double Random::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw InputError("gamma: shape and rate must be positive");
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(engine_);
}

double Random::inverse_gamma(double shape, double scale) { return 1.0 / gamma(shape, scale); }

double Random::exponential(double rate) {
  if (!(rate > 0.0)) throw InputError("exponential: rate must be positive");
  std::exponential_distribution<double> dist(rate);
  return dist(engine_);
}

double Random::inverse_gaussian(double mean, double shape) { return sample_inverse_gaussian(mean, shape, *this); }

double sample_inverse_gaussian(double mean, double shape, Random& rng) {
  if (!(mean > 0.0) || !(shape > 0.0)) throw InputError("inverse_gaussian: mean and shape must be positive");
  const double nu = rng.normal();
  const double a = mean * nu * nu;
  // Smaller root of the MSH quadratic, written without subtracting nearly
  // equal terms: x = 4 mean shape a / (a + sqrt(a^2 + 4 shape a))^2.
  const double root = std::sqrt(a * a + 4.0 * shape * a);
  const double denom = a + root;
  const double x = denom > 0.0 ? 4.0 * mean * shape * a / (denom * denom) : mean;
  if (rng.uniform() * (mean + x) <= mean) return x;
  return mean * (mean / x);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t substream) {
  return splitmix64(splitmix64(splitmix64(base) ^ (stream + 0x632be59bd9b4e019ULL)) ^ (substream + 0x8cb92ba72f3d8dd7ULL));
}

}  // namespace hs
