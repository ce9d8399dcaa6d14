#include "isac/fresnel.hpp"
#include "isac/types.hpp"

#include "doctest.h"

#include <cmath>

using isac::ambiguity::fresnel;

namespace {

// composite Simpson on [0, x]
std::pair<double, double> simpson(double x, int n) {
    const double h = x / n;
    double c = 0.0, s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double t = i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        c += w * std::cos(0.5 * isac::kPi * t * t);
        s += w * std::sin(0.5 * isac::kPi * t * t);
    }
    return {c * h / 3.0, s * h / 3.0};
}

} // namespace

TEST_CASE("fresnel reference values") {
    auto f = fresnel(1.0);
    CHECK(f.c == doctest::Approx(0.779893).epsilon(1e-6));
    CHECK(f.s == doctest::Approx(0.438259).epsilon(1e-6));
    auto z = fresnel(0.0);
    CHECK(z.c == 0.0);
    CHECK(z.s == 0.0);
}

TEST_CASE("fresnel against quadrature") {
    for (double x : {1e-4, 0.1, 0.5, 0.9, 1.2, 1.49, 1.5, 1.51, 2.0, 2.5, 3.3, 5.0, 7.7, 10.0}) {
        const int n = 2 * int(4000 * (1.0 + x * x));
        auto [c, s] = simpson(x, n);
        auto f = fresnel(x);
        INFO("x = " << x);
        CHECK(std::abs(f.c - c) < 1e-10);
        CHECK(std::abs(f.s - s) < 1e-10);
    }
}

TEST_CASE("fresnel symmetry and limits") {
    for (double x : {0.3, 1.5, 4.0, 20.0}) {
        auto p = fresnel(x), m = fresnel(-x);
        CHECK(m.c == -p.c);
        CHECK(m.s == -p.s);
    }
    // C(x) - 1/2 ~ sin(pi x^2/2)/(pi x), S(x) - 1/2 ~ -cos(pi x^2/2)/(pi x)
    for (double x : {30.0, 100.0, 1000.5}) {
        auto f = fresnel(x);
        const double a = 0.5 * isac::kPi * x * x;
        CHECK(std::abs(f.c - 0.5 - std::sin(a) / (isac::kPi * x)) < 1.0 / (x * x * x));
        CHECK(std::abs(f.s - 0.5 + std::cos(a) / (isac::kPi * x)) < 1.0 / (x * x * x));
    }
}
