#include "isac/channel.hpp"
#include "isac/comms.hpp"
#include "isac/rng.hpp"
#include "support.hpp"

#include "doctest.h"

using namespace isac;
using namespace isac::comms;
using namespace testing_support;
using waveform::ChirpMode;

namespace {

// Textbook shift register: sr[0] is the newest bit, taps read MSB first.
Bits reference_encode(const Bits& in) {
    const int g0[7] = {1, 1, 1, 1, 0, 0, 1};  // 171
    const int g1[7] = {1, 0, 1, 1, 0, 1, 1};  // 133
    int sr[7] = {};
    Bits out;
    Bits padded = in;
    padded.insert(padded.end(), 6, 0);
    for (auto b : padded) {
        for (int i = 6; i > 0; --i) sr[i] = sr[i - 1];
        sr[0] = b;
        int a = 0, c = 0;
        for (int i = 0; i < 7; ++i) {
            a ^= sr[i] & g0[i];
            c ^= sr[i] & g1[i];
        }
        out.push_back(std::uint8_t(a));
        out.push_back(std::uint8_t(c));
    }
    return out;
}

int hamming(const Bits& a, const Bits& b) {
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

LinkSetup setup(Scheme scheme, double alpha, int pilot_step, bool multipath) {
    LinkSetup s;
    s.cfg = WaveformConfig::nr(256, 14);
    s.cfg.alpha = alpha;
    s.scheme = scheme;
    s.plan = waveform::full_band_plan(s.cfg, ChirpMode::PerSymbol);
    s.pilot_step = pilot_step;
    s.multipath = multipath;
    return s;
}

} // namespace

TEST_CASE("encoder structure") {
    CHECK(conv_encode(Bits(10, 0)) == Bits(32, 0));
    Bits one(1, 1);
    Bits impulse = conv_encode(one);
    REQUIRE(impulse.size() == 14);
    const Bits expected = {1, 1, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1, 1, 1};
    CHECK(impulse == expected);
    auto eng = rng::stream(8, 0);
    for (std::size_t n : {std::size_t(1), std::size_t(7), std::size_t(100)}) {
        Bits b = rng::random_bits(eng, n);
        Bits c = conv_encode(b);
        CHECK(c.size() == 2 * (n + 6));
        CHECK(c == reference_encode(b));
    }
}

TEST_CASE("viterbi corrects and stays maximum likelihood") {
    auto eng = rng::stream(9, 0);
    Bits b = rng::random_bits(eng, 500);
    Bits c = conv_encode(b);
    CHECK(viterbi_decode(c) == b);
    for (std::size_t pos : {std::size_t(0), std::size_t(1), std::size_t(333), c.size() - 1}) {
        Bits e = c;
        e[pos] ^= 1;
        CHECK(viterbi_decode(e) == b);
    }

    // exhaustive search over every 8-bit message
    std::vector<Bits> book;
    for (unsigned v = 0; v < 256; ++v) {
        Bits m(8);
        for (int i = 0; i < 8; ++i) m[i] = std::uint8_t((v >> i) & 1U);
        book.push_back(conv_encode(m));
    }
    std::uniform_int_distribution<int> coin(0, 9);
    for (int trial = 0; trial < 200; ++trial) {
        Bits rx = book[std::size_t(trial % 256)];
        for (auto& bit : rx)
            if (coin(eng) < 2) bit ^= 1;
        int best = 1 << 20;
        for (const auto& cw : book) best = std::min(best, hamming(cw, rx));
        CHECK(hamming(conv_encode(viterbi_decode(rx)), rx) == best);
    }

    CHECK_THROWS_AS(viterbi_decode(Bits(13, 0)), InvalidInput);
    CHECK_THROWS_AS(viterbi_decode(Bits(12, 0)), InvalidInput);
}

TEST_CASE("viterbi on random input is a coin flip") {
    auto eng = rng::stream(10, 0);
    Bits noise = rng::random_bits(eng, 20012);
    Bits d = viterbi_decode(noise);
    double ones = 0;
    for (auto v : d) ones += v;
    CHECK(ones / double(d.size()) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("demodulation") {
    auto cfg = WaveformConfig::nr(128, 3);
    auto eng = rng::stream(11, 0);
    auto g = waveform::random_qpsk_grid(cfg, eng);
    auto x = waveform::ofdm_modulate(g, cfg);
    auto d = ofdm_demodulate(x, cfg, {});
    CHECK(max_abs_diff(d.grid.symbols, g.symbols) < 1e-10);

    channel::PathTap two;
    two.gain_db = 20 * std::log10(2.0);
    auto y = channel::apply_paths(x, {two});
    CHECK(max_abs_diff(ofdm_demodulate(y, cfg, genie_csi({two}, cfg)).grid.symbols, g.symbols) < 1e-12);

    auto taps = channel::multipath_profile(3);
    auto z = channel::apply_paths(x, taps);
    CHECK(max_abs_diff(ofdm_demodulate(z, cfg, genie_csi(taps, cfg)).grid.symbols, g.symbols) < 1e-9);

    CVector zero_csi(std::size_t(cfg.n_symbols) * cfg.n_subcarriers, Complex(1.0, 0.0));
    zero_csi[5] = 0.0;
    auto e = ofdm_demodulate(x, cfg, zero_csi);
    CHECK(e.erasures[5] == 1);
    CHECK(e.erasures[6] == 0);
}

TEST_CASE("dechirp") {
    auto cfg = WaveformConfig::nr(128, 2);
    auto eng = rng::stream(12, 0);
    auto g = waveform::random_qpsk_grid(cfg, eng);
    auto plan = waveform::full_band_plan(cfg, ChirpMode::PerSymbol);
    auto s = waveform::ofdm_modulate(g, cfg);
    const std::vector<PathTap> flat{PathTap{}};

    auto k = waveform::compose_cm(g, plan, cfg);
    CHECK(max_abs_diff(dechirp(k, plan, Scheme::CM, 0.0, flat, cfg).samples, s.samples) < 1e-12);

    auto c = waveform::generate_chirp(plan, cfg);
    auto taps = channel::multipath_profile(4);
    auto rx = channel::apply_paths(waveform::compose_aac(s, c, 0.0), taps);
    CHECK(dechirp(rx, plan, Scheme::AAC, 0.0, taps, cfg).samples == rx.samples);

    auto a = waveform::compose_aac(s, c, 0.5);
    CHECK(max_abs_diff(dechirp(a, plan, Scheme::AAC, 0.5, flat, cfg).samples, s.samples) < 1e-12);
    CHECK_THROWS_AS(dechirp(a, plan, Scheme::AAC, 1.0, flat, cfg), InvalidInput);

    // through multipath the CM receiver hands back H applied to the plain OFDM signal
    auto hk = channel::apply_paths(k, taps);
    auto y = dechirp(hk, plan, Scheme::CM, 0.0, taps, cfg);
    auto d = ofdm_demodulate(y, cfg, genie_csi(taps, cfg));
    CHECK(max_abs_diff(d.grid.symbols, g.symbols) < 1e-9);
}

TEST_CASE("link metrics") {
    LinkResult ok;
    ok.frames = 10;
    CHECK(spectral_efficiency(ok, 0.75, 2, 0.5) == doctest::Approx(0.75));
    CHECK(spectral_efficiency(ok, 1.0, 2, 0.5) / spectral_efficiency(ok, 0.75, 2, 0.5) == doctest::Approx(4.0 / 3.0));
    LinkResult bad = ok;
    bad.frame_errors = 10;
    CHECK(spectral_efficiency(bad, 1.0, 2, 0.5) == 0.0);
    CHECK_THROWS_AS(spectral_efficiency(ok, 0.0, 2, 0.5), InvalidInput);

    CHECK(ebn0_to_snr_db(10.0, 2, 0.5, 1024, 1024) == doctest::Approx(10.0));
    CHECK(ebn0_to_snr_db(10.0, 2, 0.5, 768, 1024) == doctest::Approx(10.0 + 10 * std::log10(0.75)));

    auto cfg = WaveformConfig::nr(256, 14);
    CHECK(data_fraction(cfg, 4) == doctest::Approx(0.75));
    CHECK(data_fraction(cfg, 0) == 1.0);
    CHECK(info_bits_per_frame(cfg, 0) == 256 * 14 - 6);
}

TEST_CASE("frame layout places comb pilots") {
    auto cfg = WaveformConfig::nr(64, 2);
    Bits coded(2 * data_elements(cfg, 4), 0);
    auto g = build_data_grid(coded, cfg, 4);
    for (int m = 0; m < 2; ++m)
        for (int n = 0; n < 64; ++n) {
            CHECK(g.is_data(m, n) == (n % 4 != 0));
            if (n % 4 == 0) CHECK(g.at(m, n) == waveform::reference_symbol(m, n));
        }
    CHECK(extract_data(g, g).size() == data_elements(cfg, 4));
}

TEST_CASE("noiseless links are error free") {
    const double inf = std::numeric_limits<double>::infinity();
    for (bool mp : {false, true}) {
        CHECK(simulate_link(setup(Scheme::OFDM, 0.0, 4, mp), inf, 4, 1).bit_errors == 0);
        CHECK(simulate_link(setup(Scheme::CM, 0.0, 4, mp), inf, 4, 1).bit_errors == 0);
        for (double a : {0.1, 0.3, 0.5, 0.9})
            CHECK(simulate_link(setup(Scheme::AAC, a, 0, mp), inf, 4, 1).bit_errors == 0);
    }
}

TEST_CASE("parallel and serial links agree") {
    auto s = setup(Scheme::AAC, 0.3, 0, true);
    auto a = simulate_link(s, 4.0, 6, 21), b = simulate_link_serial(s, 4.0, 6, 21);
    CHECK(a.bit_errors == b.bit_errors);
    CHECK(a.frame_errors == b.frame_errors);
    CHECK(a.bits_tx == b.bits_tx);
    CHECK(a.ber >= 0.0);
    CHECK(a.ber <= 1.0);
}

TEST_CASE("BER grows with the chirp share") {
    // fixed frames and noise streams, so the comparison is paired
    double prev = -1.0;
    for (double a : {0.1, 0.3, 0.5}) {
        auto r = simulate_link(setup(Scheme::AAC, a, 0, true), 5.0, 12, 5);
        CHECK(r.ber >= prev);
        prev = r.ber;
    }
}

TEST_CASE("CM and OFDM error rates are comparable in a flat channel") {
    auto o = simulate_link(setup(Scheme::OFDM, 0.0, 4, false), 4.0, 12, 6);
    auto c = simulate_link(setup(Scheme::CM, 0.0, 4, false), 4.0, 12, 6);
    // two-proportion z test at 95 %
    const double n = double(o.bits_tx), p = (o.ber + c.ber) / 2;
    const double z = std::abs(o.ber - c.ber) / std::sqrt(2 * p * (1 - p) / n);
    CHECK(z < 1.96);
}
