#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace hs {

/// Seeded random stream used by every sampler. Deterministic for a given
/// seed on a given standard library.
class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  Eigen::VectorXd normal(Eigen::Index n);
  double uniform() { return uniform_(engine_); }
  bool coin() { return uniform() < 0.5; }

  /// Gamma with shape/rate parameterization.
  double gamma(double shape, double rate);
  /// Inverse gamma: 1/X with X ~ gamma(shape, rate = scale).
  double inverse_gamma(double shape, double scale);
  /// Inverse Gaussian with mean `mean` and shape `shape`.
  double inverse_gaussian(double mean, double shape);
  /// Exponential with the given rate.
  double exponential(double rate);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Michael-Schucany-Haas transformation: one chi-square(1) draw mapped to
/// the smaller root, then a uniform choosing between x and mean^2/x.
/// The root is evaluated in a cancellation-free form so huge means stay
/// accurate.
double sample_inverse_gaussian(double mean, double shape, Random& rng);

/// Independent 64-bit seed for a sub-stream (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t substream = 0);

}  // namespace hs
