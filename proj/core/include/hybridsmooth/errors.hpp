#pragma once

#include <stdexcept>
#include <string>

namespace hs {

/// Malformed or out-of-contract input: bad files, dimension mismatches,
/// invalid parameters.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical procedure broke down (failed factorization, negative
/// eigenvalue beyond tolerance, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hs
