#include "isac/fft.hpp"
#include "isac/rng.hpp"
#include "support.hpp"

#include "doctest.h"

using namespace isac;
using namespace testing_support;

TEST_CASE("fft matches a naive DFT in both directions") {
    for (std::size_t n : {1u, 8u, 64u, 96u}) {
        CVector x = random_complex(n, 7 + n);
        CVector f = x, i = x;
        fft::forward(f);
        fft::inverse(i);
        CHECK(max_abs_diff(f, dft(x, -1)) < 1e-9 * std::sqrt(energy(x)) * double(n));
        CHECK(max_abs_diff(i, dft(x, +1)) < 1e-9 * std::sqrt(energy(x)) * double(n));
    }
}

TEST_CASE("unitary transforms round trip and keep energy") {
    CVector x = random_complex(256, 3);
    CVector y = x;
    fft::forward_unitary(y);
    CHECK(energy(y) == doctest::Approx(energy(x)).epsilon(1e-12));
    fft::inverse_unitary(y);
    CHECK(max_abs_diff(x, y) < 1e-12);
}

TEST_CASE("power-of-two helpers") {
    CHECK(fft::next_pow2(1) == 1);
    CHECK(fft::next_pow2(5) == 8);
    CHECK(fft::next_pow2(1024) == 1024);
    CHECK(fft::is_pow2(1024));
    CHECK_FALSE(fft::is_pow2(96));
    CHECK_FALSE(fft::is_pow2(0));
}

TEST_CASE("streams are reproducible and distinct") {
    auto a = rng::stream(42, 3), b = rng::stream(42, 3), c = rng::stream(42, 4), d = rng::stream(43, 3);
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != d());
}

TEST_CASE("complex gaussian variance") {
    auto eng = rng::stream(1, 0);
    double acc = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) acc += std::norm(rng::complex_gaussian(eng, 2.0));
    CHECK(acc / n == doctest::Approx(2.0).epsilon(0.02));
}
