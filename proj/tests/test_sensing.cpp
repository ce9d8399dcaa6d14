#include "isac/channel.hpp"
#include "isac/experiments.hpp"
#include "isac/rng.hpp"
#include "isac/sensing.hpp"
#include "support.hpp"

#include "doctest.h"

using namespace isac;
using namespace isac::sensing;
using namespace testing_support;
using waveform::ChirpMode;

TEST_CASE("FFT correlation equals direct circular correlation") {
    auto cfg = WaveformConfig::nr(64, 1);
    cfg.cp_samples = 0;
    auto rx = random_complex(64, 1), tp = random_complex(64, 2);
    auto p = matched_filter(TimeSignal{rx, cfg.sample_rate_hz(), 0.0}, TimeSignal{tp, cfg.sample_rate_hz(), 0.0}, cfg);
    REQUIRE(p.size() == 1);
    // independent oracle: direct sum written out here
    CVector ref(64);
    for (std::size_t tau = 0; tau < 64; ++tau)
        for (std::size_t l = 0; l < 64; ++l) ref[tau] += rx[(l + tau) % 64] * std::conj(tp[l]);
    CHECK(max_abs_diff(p[0].correlation, ref) <= 1e-9 * std::abs(ref[0]) + 1e-9 * std::sqrt(energy(ref)));
    CHECK(max_abs_diff(circular_correlation_direct(rx, tp), ref) < 1e-9);
}

TEST_CASE("autocorrelation peaks at lag zero") {
    auto cfg = WaveformConfig::nr(128, 1);
    auto eng = rng::stream(3, 0);
    auto g = waveform::random_qpsk_grid(cfg, eng);
    auto x = waveform::ofdm_modulate(g, cfg);
    TimeSignal t{CVector(waveform::useful_part(x, cfg, 0).begin(), waveform::useful_part(x, cfg, 0).end()),
                 cfg.sample_rate_hz(), 0.0};
    auto p = matched_filter(x, t, cfg).front();
    CHECK(estimate_range(p, cfg.sample_rate_hz()).peak_bin == 0);
}

TEST_CASE("noiseless target at 50 m lands in bin 41") {
    cli::SensingSetup s;
    s.cfg = WaveformConfig::nr(1024, 14);
    s.scheme = cli::SensingScheme::Chirp;
    s.range_m = 50.0;
    const double r = cli::range_trial(s, std::numeric_limits<double>::infinity(), 1, 0);
    CHECK(r == doctest::Approx(kSpeedOfLight * 41 / (2 * 122.88e6)));
    CHECK(r == doctest::Approx(50.05).epsilon(1e-3));
}

TEST_CASE("every integer delay is recovered exactly") {
    cli::SensingSetup s;
    s.cfg = WaveformConfig::nr(256, 1);
    s.scheme = cli::SensingScheme::Chirp;
    const double fs = s.cfg.sample_rate_hz();
    for (int d = 0; d < 256; ++d) {
        s.range_m = d * kSpeedOfLight / (2.0 * fs);
        const double r = cli::range_trial(s, std::numeric_limits<double>::infinity(), 1, 0);
        CHECK(std::lround(r * 2.0 * fs / kSpeedOfLight) == d);
        CHECK(r == doctest::Approx(s.range_m).epsilon(1e-12));
    }

    // direct matched filter on a lone chirp symbol, checking for ties
    auto plan = waveform::full_band_plan(s.cfg, ChirpMode::PerSymbol);
    auto c = waveform::generate_chirp(plan, s.cfg);
    TimeSignal tmpl{CVector(waveform::useful_part(c, s.cfg, 0).begin(), waveform::useful_part(c, s.cfg, 0).end()),
                    fs, 0.0};
    for (int d = 0; d < 256; ++d) {
        channel::PathTap t;
        t.delay_samples = d;
        auto e = estimate_range(matched_filter(channel::apply_paths(c, {t}), tmpl, s.cfg)[0], fs);
        CHECK(e.peak_bin == d);
        CHECK_FALSE(e.tie);
    }
}

TEST_CASE("range estimation conventions") {
    RangeProfile p;
    p.correlation = {3.0, 1.0, 0.5};
    CHECK(estimate_range(p, 122.88e6).range_m == 0.0);
    p.correlation.assign(64, 0.0);
    p.correlation[41] = 1.0;
    CHECK(estimate_range(p, 122.88e6).range_m == doctest::Approx(50.05).epsilon(1e-3));

    RangeProfile flat;
    flat.correlation.assign(16, Complex(1.0, 0.0));
    auto e = estimate_range(flat, 1.0);
    CHECK(e.tie);
    CHECK(e.peak_bin == 0);
    CHECK_THROWS_AS(estimate_range(RangeProfile{}, 1.0), InvalidInput);
}

TEST_CASE("earliest peak above median picks the line-of-sight path") {
    RangeProfile p;
    p.correlation.assign(64, Complex(0.01, 0.0));
    p.correlation[5] = 0.6;
    p.correlation[9] = 1.0;
    PeakOptions opt;
    CHECK(estimate_range(p, 1.0, opt).peak_bin == 9);
    opt.rule = PeakRule::EarliestAboveMedian;
    CHECK(estimate_range(p, 1.0, opt).peak_bin == 5);
}

TEST_CASE("timing drift of 33.33 ns biases range by about 5 m") {
    cli::SensingSetup s;
    s.cfg = WaveformConfig::nr(1024, 14);
    s.scheme = cli::SensingScheme::Chirp;
    const double inf = std::numeric_limits<double>::infinity();
    const double base = cli::range_trial(s, inf, 1, 0);
    s.timing_drift_s = 33.333e-9;
    const double biased = cli::range_trial(s, inf, 1, 0);
    CHECK(biased - base == doctest::Approx(5.0).epsilon(0.05));

    s.timing_drift_s = 1.0 / s.cfg.sample_rate_hz();
    CHECK(cli::range_trial(s, inf, 1, 0) - base == doctest::Approx(kSpeedOfLight / (2 * s.cfg.sample_rate_hz())));
}

TEST_CASE("velocity from phase progression") {
    auto cfg = WaveformConfig::nr(1024, 14);
    const double To = cfg.symbol_duration_s();
    CVector z(14);
    for (int m = 0; m < 14; ++m) z[m] = std::polar(2.0, 0.3);
    CHECK(estimate_velocity(z, cfg) == doctest::Approx(0.0));

    const double dphi = 2 * kPi * 4800.0 * To;
    CHECK(dphi == doctest::Approx(0.2690).epsilon(1e-3));
    for (int m = 0; m < 14; ++m) z[m] = std::polar(1.0, 1.0 + dphi * m);
    CHECK(estimate_doppler(z, cfg) == doctest::Approx(4800.0));
    CHECK(estimate_velocity(z, cfg) == doctest::Approx(30.0));

    // beyond lambda / (4 T_o) the phase step exceeds pi and wraps
    const double vmax = cfg.wavelength_m() / (4 * To);
    const double v = 1.2 * vmax;
    for (int m = 0; m < 14; ++m) z[m] = std::polar(1.0, 4 * kPi * v / cfg.wavelength_m() * To * m);
    CHECK(estimate_velocity(z, cfg) == doctest::Approx(v - 2 * vmax));

    CHECK_THROWS_AS(estimate_velocity(CVector(1), cfg), InvalidInput);
}

TEST_CASE("CFO biases velocity by lambda/2 epsilon") {
    cli::SensingSetup s;
    s.cfg = WaveformConfig::nr(256, 14);
    s.scheme = cli::SensingScheme::Chirp;
    s.velocity_mps = 10.0;
    s.range_m = 10.0 * kSpeedOfLight / (2.0 * s.cfg.sample_rate_hz());  // integer delay of 10 samples
    const double inf = std::numeric_limits<double>::infinity();
    const double base = cli::velocity_trial(s, inf, 1, 0);
    CHECK(base == doctest::Approx(10.0).epsilon(1e-6));
    for (double eps : {160.0, -160.0}) {
        s.cfo_hz = eps;
        CHECK(cli::velocity_trial(s, inf, 1, 0) - base == doctest::Approx(eps * s.cfg.wavelength_m() / 2).epsilon(1e-6));
    }
    CHECK(160.0 * s.cfg.wavelength_m() / 2 == doctest::Approx(1.0));
}

TEST_CASE("sensing limits") {
    auto cfg = WaveformConfig::nr(256, 14);
    auto a = sensing_limits(256, 1, cfg);
    CHECK(a.range_resolution_m == doctest::Approx(4.8828125));
    CHECK(a.max_unambiguous_range_m == doctest::Approx(668.9453125));
    CHECK(a.max_unambiguous_velocity_mps == doctest::Approx(cfg.wavelength_m() / (4 * cfg.symbol_duration_s())));
    auto b = sensing_limits(2, 14, cfg);
    CHECK(b.range_resolution_m == doctest::Approx(625.0));
    // three significant figures: half a unit in the third digit
    CHECK(std::abs(b.max_unambiguous_range_m - 1.20e6) <= 0.005e6);
    CHECK_THROWS_AS(sensing_limits(0, 1, cfg), InvalidInput);
    CHECK_THROWS_AS(sensing_limits(257, 1, cfg), InvalidInput);
    CHECK_THROWS_AS(sensing_limits(4, 0, cfg), InvalidInput);
}

TEST_CASE("complexity counts") {
    CHECK(complexity_counts(1024, 14, ComplexityScheme::AAC) == 14 * (10240 + 1024) + 5120);
    CHECK(complexity_counts(1024, 14, ComplexityScheme::CM) == 14 * (15360 + 1024));
    for (int N : {2, 64, 4096})
        for (int M : {1, 7, 14})
            CHECK(complexity_counts(N, M, ComplexityScheme::AAC) == complexity_counts(N, M, ComplexityScheme::OFDM_PRS));
    CHECK_THROWS_AS(complexity_counts(1000, 14, ComplexityScheme::AAC), InvalidInput);
}

TEST_CASE("rmse aggregation") {
    std::vector<std::pair<double, double>> exact = {{1, 1}, {2, 2}};
    CHECK(rmse_aggregate(exact) == 0.0);
    std::vector<std::pair<double, double>> pm = {{1, 0}, {-1, 0}};
    CHECK(rmse_aggregate(pm) == doctest::Approx(1.0));
    std::mt19937_64 eng(3);
    std::normal_distribution<double> d(0.0, 2.0);
    std::vector<std::pair<double, double>> g;
    for (int i = 0; i < 10000; ++i) g.emplace_back(d(eng), 0.0);
    CHECK(rmse_aggregate(g) == doctest::Approx(2.0).epsilon(0.05));
    CHECK_THROWS_AS(rmse_aggregate({}), InvalidInput);
}

TEST_CASE("AAC sensing never consults the data") {
    // two frames with different data, same noise seed: the AAC template is identical
    cli::SensingSetup s;
    s.cfg = WaveformConfig::nr(128, 2);
    auto e1 = rng::stream(1, 0), e2 = rng::stream(2, 0);
    auto f1 = cli::make_sensing_frame(s, e1), f2 = cli::make_sensing_frame(s, e2);
    CHECK(f1.tmpl.samples == f2.tmpl.samples);
    CHECK(f1.tx.samples != f2.tx.samples);
}

TEST_CASE("CM matched filtering needs the true data") {
    auto cfg = WaveformConfig::nr(128, 1);
    auto plan = waveform::full_band_plan(cfg, ChirpMode::PerSymbol);
    int worse = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        auto eng = rng::stream(50, t);
        auto g = waveform::random_qpsk_grid(cfg, eng);
        auto wrong = waveform::random_qpsk_grid(cfg, eng);
        auto tx = waveform::compose_cm(g, plan, cfg);
        channel::PathTap tap;
        tap.delay_samples = 7;
        auto rx = channel::apply_paths(tx, {tap});
        auto right_t = waveform::compose_cm(g, plan, cfg), wrong_t = waveform::compose_cm(wrong, plan, cfg);
        auto peak = [&](const TimeSignal& full) {
            auto u = waveform::useful_part(full, cfg, 0);
            auto p = matched_filter(rx, TimeSignal{CVector(u.begin(), u.end()), cfg.sample_rate_hz(), 0.0}, cfg)[0];
            return std::abs(p.correlation[7]);
        };
        if (peak(wrong_t) <= peak(right_t)) ++worse;
    }
    CHECK(worse == 100);
}

TEST_CASE("slot placement does not lose to symbol placement") {
    cli::SensingSetup s;
    s.cfg = WaveformConfig::nr(256, 14);
    s.scheme = cli::SensingScheme::AAC;
    s.cfg.alpha = 0.5;
    for (double snr : {-20.0, -15.0, -10.0, -5.0, 0.0}) {
        s.placement = ChirpMode::PerSymbol;
        const double sym = cli::rmse_range(s, snr, 40, 11);
        s.placement = ChirpMode::PerSlot;
        const double slot = cli::rmse_range(s, snr, 40, 11);
        CHECK(slot <= sym);
    }
}
