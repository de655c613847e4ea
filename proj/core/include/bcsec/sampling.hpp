#pragma once

#include <cstdint>
#include <random>

#include "bcsec/probability.hpp"

namespace bcsec {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from (master, task index) with splitmix64.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t task);

/// Fully random joint: every chain factor drawn from a flat Dirichlet, channel
/// p(y1,y2,z|x) drawn as one table. Used for identity checks; gates usually fail.
JointDistribution random_joint(Rng& rng, std::size_t aux_size, std::size_t x_size);

/// q-ary symmetric channel law p(y|x) with total crossover probability p.
std::vector<double> symmetric_channel(std::size_t q, double crossover);

/// Product channel p(y1,y2,z|x) = p(y1|x) p(y2|x) p(z|x) from three square tables.
FactorTable product_channel(std::size_t q, const std::vector<double>& y1,
                            const std::vector<double>& y2, const std::vector<double>& z);

struct GatedFamily {
    std::size_t alphabet = 2;  ///< size shared by all auxiliaries and X, Y1, Y2, Z
};

/// Joint satisfying every subject-to gate of the old region in closure.
/// One private auxiliary copies V (so I(V1;V2|V,Z) = 0) and the eavesdropper sees a
/// q-ary symmetric channel that is stochastically degraded w.r.t. both receivers.
JointDistribution gated_joint(Rng& rng, GatedFamily family = {});

}  // namespace bcsec
