#include "isac/sensing.hpp"

#include "isac/fft.hpp"

#include <algorithm>
#include <cmath>

namespace isac::sensing {

namespace {

CVector lag_correlate(std::span<const Complex> rx, const CVector& tmpl_spec) {
    CVector a(rx.begin(), rx.end());
    fft::forward(a);
    for (std::size_t k = 0; k < a.size(); ++k) a[k] *= std::conj(tmpl_spec[k]);
    fft::inverse(a);
    const double s = 1.0 / double(a.size());
    for (auto& v : a) v *= s;
    return a;
}

RangeProfile make_profile(CVector corr, double fs, int m) {
    RangeProfile p;
    p.lag_axis_s.resize(corr.size());
    for (std::size_t k = 0; k < corr.size(); ++k) p.lag_axis_s[k] = double(k) / fs;
    p.correlation = std::move(corr);
    p.symbol_index = m;
    return p;
}

} // namespace

std::vector<RangeProfile> matched_filter(const TimeSignal& rx, const TimeSignal& tmpl,
                                         const WaveformConfig& cfg) {
    cfg.validate();
    const std::size_t N = std::size_t(cfg.n_subcarriers);
    require(rx.size() % cfg.symbol_length() == 0 && rx.size() > 0,
            "received signal is not a whole number of symbols");
    const int M = int(rx.size() / cfg.symbol_length());
    const bool fixed = tmpl.size() == N;
    require(fixed || tmpl.size() == rx.size(), "template must hold N samples or match the received frame");

    CVector spec;
    if (fixed) {
        spec.assign(tmpl.samples.begin(), tmpl.samples.end());
        fft::forward(spec);
    }
    std::vector<RangeProfile> out;
    out.reserve(std::size_t(M));
    for (int m = 0; m < M; ++m) {
        if (!fixed) {
            auto t = waveform::useful_part(tmpl, cfg, m);
            spec.assign(t.begin(), t.end());
            fft::forward(spec);
        }
        out.push_back(make_profile(lag_correlate(waveform::useful_part(rx, cfg, m), spec), cfg.sample_rate_hz(), m));
    }
    return out;
}

RangeProfile correlate_window(const TimeSignal& rx, std::span<const Complex> tmpl, std::size_t start,
                              std::size_t n_lags) {
    require(!tmpl.empty() && n_lags > 0, "empty template or lag window");
    require(start < rx.size(), "window start beyond the signal");
    const std::size_t P = fft::next_pow2(tmpl.size() + n_lags);
    CVector a(P);
    for (std::size_t l = 0; l < P && start + l < rx.size(); ++l) a[l] = rx.samples[start + l];
    CVector b(P);
    std::copy(tmpl.begin(), tmpl.end(), b.begin());
    fft::forward(b);
    CVector corr = lag_correlate(a, b);
    corr.resize(n_lags);
    return make_profile(std::move(corr), rx.sample_rate_hz, 0);
}

CVector circular_correlation_direct(std::span<const Complex> rx, std::span<const Complex> tmpl) {
    require(rx.size() == tmpl.size() && !rx.empty(), "length mismatch");
    const std::size_t N = rx.size();
    CVector out(N);
    for (std::size_t tau = 0; tau < N; ++tau) {
        Complex acc{};
        for (std::size_t l = 0; l < N; ++l) acc += rx[(l + tau) % N] * std::conj(tmpl[l]);
        out[tau] = acc;
    }
    return out;
}

RangeEstimate estimate_range(const RangeProfile& profile, double fs, const PeakOptions& opt) {
    require(!profile.correlation.empty(), "empty range profile");
    require(fs > 0.0, "sample rate must be positive");
    std::size_t n = profile.correlation.size();
    if (opt.max_lag > 0) n = std::min(n, opt.max_lag);
    std::vector<double> mag(n);
    for (std::size_t k = 0; k < n; ++k) mag[k] = std::abs(profile.correlation[k]);

    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k)
        if (mag[k] > mag[best]) best = k;
    RangeEstimate est;
    const double tol = 1e-12 * mag[best];
    for (std::size_t k = 0; k < n; ++k)
        if (k != best && std::abs(mag[k] - mag[best]) <= tol) {
            est.tie = true;
            best = std::min(best, k);
        }

    if (opt.rule == PeakRule::EarliestAboveMedian && n > 2) {
        std::vector<double> off;
        off.reserve(n - 1);
        for (std::size_t k = 0; k < n; ++k)
            if (k != best) off.push_back(mag[k]);
        std::nth_element(off.begin(), off.begin() + std::ptrdiff_t(off.size() / 2), off.end());
        const double thr = opt.median_factor * off[off.size() / 2];
        for (std::size_t k = 0; k < best; ++k) {
            bool left = k == 0 || mag[k] >= mag[k - 1];
            bool right = mag[k] >= mag[k + 1];
            if (left && right && mag[k] > thr) {
                best = k;
                break;
            }
        }
    }

    double frac = 0.0;
    if (opt.interpolate && best > 0 && best + 1 < n) {
        double a = mag[best - 1], b = mag[best], c = mag[best + 1];
        double den = a - 2.0 * b + c;
        if (den != 0.0) frac = 0.5 * (a - c) / den;
    }
    est.peak_bin = int(best);
    est.fractional_bin = double(best) + frac;
    est.range_m = kSpeedOfLight * est.fractional_bin / (2.0 * fs);
    return est;
}

double estimate_doppler(std::span<const Complex> z, const WaveformConfig& cfg) {
    require(z.size() >= 2, "velocity needs at least two symbols");
    // unwrap and average the successive differences; the mean telescopes
    double prev = std::arg(z[0]);
    double acc = 0.0;
    for (std::size_t m = 1; m < z.size(); ++m) {
        double ph = std::arg(z[m]);
        double d = std::remainder(ph - prev, 2.0 * kPi);
        acc += d;
        prev = ph;
    }
    double dphi = acc / double(z.size() - 1);
    return dphi / (2.0 * kPi * cfg.symbol_duration_s());
}

double estimate_velocity(std::span<const Complex> z, const WaveformConfig& cfg) {
    return kSpeedOfLight * estimate_doppler(z, cfg) / (2.0 * cfg.carrier_hz);
}

SensingLimits sensing_limits(int n, int m, const WaveformConfig& cfg) {
    cfg.validate();
    require(n >= 1 && n <= cfg.n_subcarriers, "n must lie in [1, N]");
    require(m >= 1, "m must be at least 1");
    const double df = cfg.subcarrier_spacing_hz;
    const double To = cfg.symbol_duration_s();
    SensingLimits s;
    s.range_resolution_m = kSpeedOfLight / (2.0 * n * df);
    s.max_unambiguous_range_m = kSpeedOfLight * cfg.sample_rate_hz() * m * To / (4.0 * n * df);
    s.max_unambiguous_velocity_mps = cfg.wavelength_m() / (4.0 * m * To);
    return s;
}

std::int64_t complexity_counts(int N, int M, ComplexityScheme scheme) {
    require(N > 0 && fft::is_pow2(std::size_t(N)), "N must be a power of two");
    require(M >= 1, "M must be at least 1");
    std::int64_t lg = 0;
    while ((std::int64_t(1) << lg) < N) ++lg;
    const std::int64_t n = N, mm = M;
    switch (scheme) {
    case ComplexityScheme::AAC:
    case ComplexityScheme::OFDM_PRS:
        return mm * (n * lg + n) + (n / 2) * lg;
    case ComplexityScheme::CM:
        // 1.5 N log2 N is integral since N is even
        return mm * (3 * n * lg / 2 + n);
    }
    return 0;
}

double rmse_aggregate(std::span<const std::pair<double, double>> estimates) {
    require(!estimates.empty(), "RMSE of an empty set");
    double acc = 0.0;
    for (const auto& [est, truth] : estimates) acc += (est - truth) * (est - truth);
    return std::sqrt(acc / double(estimates.size()));
}

} // namespace isac::sensing
