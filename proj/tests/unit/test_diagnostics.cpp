#include <doctest.h>

#include <random>

#include "hybridsmooth/diagnostics.hpp"
#include "hybridsmooth/errors.hpp"

using namespace hs;

namespace {

ChainDraws ar1(double phi, std::size_t chains, std::size_t length, std::uint64_t seed, double shift = 0.0) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> normal;
  ChainDraws out(chains);
  const double sd = std::sqrt(1.0 - phi * phi);
  for (std::size_t c = 0; c < chains; ++c) {
    double x = normal(eng);
    for (std::size_t i = 0; i < length; ++i) {
      x = phi * x + sd * normal(eng);
      out[c].push_back(x + shift * static_cast<double>(c));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("ESS of AR(1) chains matches N (1 - phi) / (1 + phi)") {
  for (double phi : {0.0, 0.5, 0.9}) {
    const auto draws = ar1(phi, 4, 20000, 1);
    const double expected = 80000.0 * (1 - phi) / (1 + phi);
    CHECK(effective_sample_size(draws) == doctest::Approx(expected).epsilon(0.15));
    CHECK(split_rhat(draws) < 1.01);
  }
}

TEST_CASE("separated chains inflate R-hat") {
  const auto draws = ar1(0.3, 4, 1000, 2, 3.0);
  CHECK(split_rhat(draws) > 1.5);
  // A drifting single chain is caught by splitting.
  ChainDraws drift(1);
  for (int i = 0; i < 1000; ++i) drift[0].push_back(i * 0.01);
  CHECK(split_rhat(drift) > 1.5);
}

TEST_CASE("diagnostics reject malformed chains") {
  CHECK_THROWS_AS(effective_sample_size({}), InputError);
  CHECK_THROWS_AS(effective_sample_size({{1, 2, 3}}), InputError);
  CHECK_THROWS_AS(split_rhat({{1, 2, 3, 4, 5}, {1, 2, 3, 4}}), InputError);
}
