#include "isac/fresnel.hpp"

#include "isac/types.hpp"

#include <cmath>
#include <complex>
#include <limits>

namespace isac::ambiguity {

FresnelCS fresnel(double x) {
    constexpr int kMaxIter = 200;
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    constexpr double kSeriesLimit = 1.5;
    const double ax = std::abs(x);
    FresnelCS r;
    if (ax < 1e-150) {
        r.c = ax;
    } else if (ax <= kSeriesLimit) {
        // alternate terms feed C and S
        const double fact = 0.5 * kPi * ax * ax;
        double sum = 0.0, sums = 0.0, sumc = ax, sign = 1.0, term = ax;
        bool odd = true;
        int n = 3;
        for (int k = 1; k <= kMaxIter; ++k) {
            term *= fact / k;
            sum += sign * term / n;
            const double test = std::abs(sum) * kEps;
            if (odd) {
                sign = -sign;
                sums = sum;
                sum = sumc;
            } else {
                sumc = sum;
                sum = sums;
            }
            if (term < test) break;
            odd = !odd;
            n += 2;
        }
        r.c = sumc;
        r.s = sums;
    } else {
        const double pix2 = kPi * ax * ax;
        std::complex<double> b(1.0, -pix2);
        std::complex<double> cc = 1.0 / std::numeric_limits<double>::min();
        std::complex<double> d = 1.0 / b;
        std::complex<double> h = d;
        int n = -1;
        for (int k = 2; k <= kMaxIter; ++k) {
            n += 2;
            const double a = -double(n) * double(n + 1);
            b += 4.0;
            d = 1.0 / (a * d + b);
            cc = b + a / cc;
            const std::complex<double> del = cc * d;
            h *= del;
            if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < kEps) break;
        }
        h *= std::complex<double>(ax, -ax);
        const std::complex<double> cs =
            std::complex<double>(0.5, 0.5) * (1.0 - std::polar(1.0, 0.5 * pix2) * h);
        r.c = cs.real();
        r.s = cs.imag();
    }
    if (x < 0.0) {
        r.c = -r.c;
        r.s = -r.s;
    }
    return r;
}

} // namespace isac::ambiguity
