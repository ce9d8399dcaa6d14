#include "isac/rng.hpp"

#include <cmath>

namespace isac::rng {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(index)));
}

Bits random_bits(std::mt19937_64& eng, std::size_t n) {
    Bits out(n);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 64 == 0) word = eng();
        out[i] = std::uint8_t((word >> (i % 64)) & 1U);
    }
    return out;
}

Complex complex_gaussian(std::mt19937_64& eng, double variance) {
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    double re = nd(eng);
    double im = nd(eng);
    return {re, im};
}

} // namespace isac::rng
