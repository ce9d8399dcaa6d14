// support.hpp - small helpers shared by the unit tests
#pragma once

#include "isac/types.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace testing_support {

using isac::Complex;
using isac::CVector;

inline CVector random_complex(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> d;
    CVector v(n);
    for (auto& x : v) x = {d(eng), d(eng)};
    return v;
}

inline double max_abs_diff(const CVector& a, const CVector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double energy(const CVector& a) {
    double e = 0.0;
    for (const auto& v : a) e += std::norm(v);
    return e;
}

// Naive DFT, sign -1 forward.
inline CVector dft(const CVector& x, int sign) {
    const std::size_t N = x.size();
    CVector out(N);
    for (std::size_t k = 0; k < N; ++k) {
        Complex acc{};
        for (std::size_t l = 0; l < N; ++l)
            acc += x[l] * std::polar(1.0, sign * 2.0 * isac::kPi * double((k * l) % N) / double(N));
        out[k] = acc;
    }
    return out;
}

// Continuous frame built straight from the grid: OFDM with cyclic prefix,
// one-symbol full-band chirps (CP taken from the chirp tail).
struct FrameOracle {
    int N = 32;
    int M = 1;
    double df = 120e3;
    int cp = 2;
    std::vector<Complex> grid;  // [m][n]

    double fs() const { return N * df; }
    double T() const { return 1.0 / df; }
    double To() const { return T() + cp / fs(); }
    double duration() const { return M * To(); }

    // position inside the useful window, CP mapped onto the tail
    bool locate(double t, int& m, double& u) const {
        if (t < 0.0 || t >= duration()) return false;
        m = std::min(M - 1, int(t / To()));
        u = t - m * To() - cp / fs();
        if (u < 0.0) u += T();
        return true;
    }
    Complex ofdm(double t) const {
        int m;
        double u;
        if (!locate(t, m, u)) return {};
        Complex acc{};
        for (int n = 0; n < N; ++n)
            acc += grid[std::size_t(m * N + n)] * std::polar(1.0, 2.0 * isac::kPi * n * df * u);
        return acc / std::sqrt(double(N));
    }
    Complex chirp(double t) const {
        int m;
        double u;
        if (!locate(t, m, u)) return {};
        const double beta = N * df / T();
        return std::polar(1.0, isac::kPi * beta * u * u);
    }
    Complex aac(double t, double alpha) const { return (1.0 - alpha) * ofdm(t) + alpha * chirp(t); }
    Complex cm(double t) const { return ofdm(t) * chirp(t); }
};

// chi(d h, f) = int x(t) conj(x(t - d h)) exp(j 2 pi f t) dt by the midpoint
// rule with K points per sample.  Result layout [doppler][delay].
inline CVector fine_ambiguity(const std::function<Complex(double)>& x, double duration, double h, int K,
                              const std::vector<int>& delays, const std::vector<double>& dopplers) {
    const double dt = h / K;
    const long P = std::lround(duration / dt);
    CVector v(static_cast<std::size_t>(P));
    for (long j = 0; j < P; ++j) v[std::size_t(j)] = x((double(j) + 0.5) * dt);
    CVector out(delays.size() * dopplers.size());
    for (std::size_t i = 0; i < dopplers.size(); ++i)
        for (std::size_t k = 0; k < delays.size(); ++k) {
            const long s = long(delays[k]) * K;
            Complex acc{};
            for (long j = std::max(0L, s); j < std::min(P, P + s); ++j)
                acc += v[std::size_t(j)] * std::conj(v[std::size_t(j - s)]) *
                       std::polar(1.0, 2.0 * isac::kPi * dopplers[i] * (double(j) + 0.5) * dt);
            out[i * delays.size() + k] = acc * dt;
        }
    return out;
}

} // namespace testing_support
