#pragma once

#include <vector>

namespace hs {

/// Draws of one scalar parameter, one inner vector per chain. Chains must
/// have equal length.
using ChainDraws = std::vector<std::vector<double>>;

/// Multi-chain effective sample size using Geyer's initial monotone
/// sequence on the combined autocorrelation.
double effective_sample_size(const ChainDraws& chains);

/// Split-chain potential scale reduction factor.
double split_rhat(const ChainDraws& chains);

}  // namespace hs
