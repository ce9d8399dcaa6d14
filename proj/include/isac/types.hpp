// types.hpp - shared scalar types, constants and the error type
#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;
using Bits = std::vector<std::uint8_t>;

inline constexpr double kSpeedOfLight = 3.0e8;
inline constexpr double kPi = 3.14159265358979323846;

// Raised for any precondition violation on public operations.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidInput(what);
}

} // namespace isac
