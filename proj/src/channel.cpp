#include "isac/channel.hpp"

#include "isac/fft.hpp"
#include "isac/rng.hpp"

#include <cmath>

namespace isac::channel {

Complex tap_gain(const PathTap& tap) {
    return std::polar(std::pow(10.0, tap.gain_db / 20.0), tap.phase_rad);
}

std::vector<PathTap> multipath_profile(std::uint64_t seed) {
    static const double power_db[] = {0.0, -8.0, -17.0, -21.0, -25.0};
    static const double delay[] = {0.0, 3.0, 5.0, 6.0, 8.0};
    auto eng = rng::stream(seed, 0x7461707368ULL);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
    std::vector<PathTap> taps;
    for (int i = 0; i < 5; ++i) taps.push_back({power_db[i], delay[i], 0.0, ph(eng)});
    return taps;
}

PathTap target_tap(double range_m, double velocity_mps, const WaveformConfig& cfg, double phase_rad) {
    PathTap t;
    t.delay_samples = 2.0 * range_m / kSpeedOfLight * cfg.sample_rate_hz();
    t.doppler_hz = 2.0 * velocity_mps * cfg.carrier_hz / kSpeedOfLight;
    t.phase_rad = phase_rad;
    return t;
}

TimeSignal delay_signal(const TimeSignal& x, double d) {
    const std::size_t L = x.size();
    require(std::isfinite(d) && std::abs(d) < double(L), "delay exceeds signal length");
    TimeSignal y;
    y.sample_rate_hz = x.sample_rate_hz;
    y.t0_s = x.t0_s;
    y.samples.assign(L, Complex{});
    double r = std::round(d);
    if (std::abs(d - r) < 1e-12) {
        long k = long(r);
        for (std::size_t l = 0; l < L; ++l) {
            long src = long(l) - k;
            if (src >= 0 && src < long(L)) y.samples[l] = x.samples[std::size_t(src)];
        }
        return y;
    }
    // Fractional part: ideal band-limited delay on a padded copy.
    std::size_t P = fft::next_pow2(2 * L + std::size_t(std::ceil(std::abs(d))));
    CVector buf(P);
    std::copy(x.samples.begin(), x.samples.end(), buf.begin());
    fft::forward(buf);
    for (std::size_t k = 0; k < P; ++k) {
        if (k == P / 2) {
            // Nyquist bin: split evenly between +-P/2 so it stays real
            buf[k] *= std::cos(kPi * d) / double(P);
            continue;
        }
        const double kk = k < P / 2 ? double(k) : double(k) - double(P);
        buf[k] *= std::polar(1.0 / double(P), -2.0 * kPi * kk * d / double(P));
    }
    fft::inverse(buf);
    std::copy(buf.begin(), buf.begin() + std::ptrdiff_t(L), y.samples.begin());
    return y;
}

TimeSignal apply_paths(const TimeSignal& x, const std::vector<PathTap>& taps) {
    require(!taps.empty(), "channel needs at least one tap");
    TimeSignal y;
    y.sample_rate_hz = x.sample_rate_hz;
    y.t0_s = x.t0_s;
    y.samples.assign(x.size(), Complex{});
    for (const auto& tap : taps) {
        require(tap.delay_samples >= 0.0 && tap.delay_samples < double(x.size()),
                "tap delay outside the signal");
        TimeSignal d = delay_signal(x, tap.delay_samples);
        Complex xi = tap_gain(tap);
        double w = 2.0 * kPi * tap.doppler_hz / x.sample_rate_hz;
        for (std::size_t l = 0; l < x.size(); ++l) {
            Complex rot = tap.doppler_hz == 0.0 ? Complex{1.0, 0.0} : std::polar(1.0, w * double(l));
            y.samples[l] += xi * d.samples[l] * rot;
        }
    }
    return y;
}

double useful_power(const TimeSignal& x, const WaveformConfig& cfg) {
    const std::size_t L = cfg.symbol_length();
    const std::size_t M = x.size() / L;
    if (M == 0) {
        double s = 0.0;
        for (const auto& v : x.samples) s += std::norm(v);
        return x.size() ? s / double(x.size()) : 0.0;
    }
    double s = 0.0;
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t j = 0; j < std::size_t(cfg.n_subcarriers); ++j)
            s += std::norm(x.samples[m * L + std::size_t(cfg.cp_samples) + j]);
    return s / double(M * std::size_t(cfg.n_subcarriers));
}

TimeSignal add_awgn(const TimeSignal& x, double snr_db, std::uint64_t seed, double signal_power) {
    if (std::isinf(snr_db) && snr_db > 0.0) return x;
    double var = signal_power / std::pow(10.0, snr_db / 10.0);
    TimeSignal y = x;
    std::mt19937_64 eng(rng::splitmix64(seed));
    for (auto& v : y.samples) v += rng::complex_gaussian(eng, var);
    return y;
}

TimeSignal add_awgn(const TimeSignal& x, double snr_db, std::uint64_t seed) {
    double p = 0.0;
    for (const auto& v : x.samples) p += std::norm(v);
    p = x.size() ? p / double(x.size()) : 0.0;
    return add_awgn(x, snr_db, seed, p);
}

TimeSignal apply_cfo(const TimeSignal& x, double epsilon_hz) {
    if (epsilon_hz == 0.0) return x;
    TimeSignal y = x;
    double w = 2.0 * kPi * epsilon_hz / x.sample_rate_hz;
    for (std::size_t l = 0; l < y.size(); ++l) y.samples[l] *= std::polar(1.0, w * double(l));
    return y;
}

TimeSignal apply_timing_drift(const TimeSignal& x, double dt_s) {
    double duration = double(x.size()) / x.sample_rate_hz;
    require(std::abs(dt_s) < duration, "timing drift exceeds signal duration");
    if (dt_s == 0.0) return x;
    return delay_signal(x, dt_s * x.sample_rate_hz);
}

TimeSignal apply_channel(const TimeSignal& x, const ChannelRealization& ch, const WaveformConfig& cfg) {
    require(!ch.taps.empty(), "channel needs at least one tap");
    TimeSignal y = apply_paths(x, ch.taps);
    y = apply_timing_drift(y, ch.timing_drift_s);
    y = apply_cfo(y, ch.cfo_hz);
    return add_awgn(y, ch.snr_db, ch.seed, useful_power(y, cfg));
}

} // namespace isac::channel
