// rng.hpp - counter-derived random streams
//
// Each Monte Carlo trial gets its own engine seeded from (seed, index),
// so results do not depend on how trials are spread over threads.

#pragma once

#include "isac/types.hpp"
#include <random>

namespace isac::rng {

std::uint64_t splitmix64(std::uint64_t x);

// Independent engine for stream `index` under master `seed`.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index);

Bits random_bits(std::mt19937_64& eng, std::size_t n);

// Circular complex Gaussian with E|z|^2 = variance.
Complex complex_gaussian(std::mt19937_64& eng, double variance);

} // namespace isac::rng
