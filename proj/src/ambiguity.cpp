#include "isac/ambiguity.hpp"

#include <algorithm>
#include <cmath>

namespace isac::ambiguity {

OverlapWindow interval_overlap(double a0, double a1, double b0, double b1, double tau) {
    OverlapWindow w;
    const double lo = std::max(a0, b0 + tau);
    const double hi = std::min(a1, b1 + tau);
    if (hi < lo) return w;
    w.empty = false;
    w.t_d = 0.5 * (hi - lo);
    w.t_a = 0.5 * (hi + lo);
    return w;
}

OverlapWindow overlap_window(int m, int m_prime, double tau, double T_o) {
    require(T_o > 0.0, "symbol duration must be positive");
    OverlapWindow w;
    const double shift = tau + (m_prime - m) * T_o;
    if (std::abs(shift) > T_o) return w;
    w.empty = false;
    w.t_d = 0.5 * (T_o - std::abs(shift));
    w.t_a = m * T_o + 0.5 * (T_o + shift);
    return w;
}

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

Complex quad_phase_integral(double A, double B, double lo, double hi) {
    const double td = 0.5 * (hi - lo);
    const double ta = 0.5 * (hi + lo);
    if (td <= 0.0) return {};
    const double width = hi - lo;
    if (std::abs(A) * width * width < 1e-10) {
        // quadratic part negligible over the window: linearize about ta
        const double b = B + 2.0 * A * ta;
        return std::polar(2.0 * td * sinc(b * td), b * ta - A * ta * ta);
    }
    // A (t + B/2A)^2 - B^2/4A with w = sqrt(2|A|/pi) (t + B/2A)
    const double k = std::sqrt(2.0 * std::abs(A) / kPi);
    const double shift = B / (2.0 * A);
    const FresnelCS f1 = fresnel(k * (lo + shift));
    const FresnelCS f2 = fresnel(k * (hi + shift));
    const double sgn = A > 0.0 ? 1.0 : -1.0;
    const Complex diff(f2.c - f1.c, sgn * (f2.s - f1.s));
    return std::polar(1.0 / k, -B * B / (4.0 * A)) * diff;
}

Complex ContinuousWaveform::eval(double t) const {
    Complex acc{};
    for (const auto& p : pieces) {
        if (t < p.t_begin || t >= p.t_end) continue;
        for (const auto& a : p.atoms) acc += a.g * std::polar(1.0, a.a2 * t * t + a.a1 * t);
    }
    return acc;
}

double ContinuousWaveform::duration() const {
    double end = 0.0;
    for (const auto& p : pieces) end = std::max(end, p.t_end);
    return end;
}

namespace {

std::vector<Atom> ofdm_atoms(const ResourceGrid& grid, const WaveformConfig& cfg, int m,
                             const std::vector<double>* weight) {
    const double df = cfg.subcarrier_spacing_hz;
    const double u = m * cfg.symbol_duration_s() + cfg.cp_samples / cfg.sample_rate_hz();
    const double scale = 1.0 / std::sqrt(double(cfg.n_subcarriers));
    std::vector<Atom> atoms;
    for (int n = 0; n < cfg.n_subcarriers; ++n) {
        Complex x = grid.at(m, n);
        if (weight) x *= (*weight)[std::size_t(n)];
        if (x == Complex{}) continue;
        const double w = 2.0 * kPi * n * df;
        atoms.push_back({x * scale * std::polar(1.0, -w * u), 0.0, w});
    }
    return atoms;
}

Atom chirp_atom(double q, double beta, double ref) {
    return {std::polar(q, kPi * beta * ref * ref), kPi * beta, -2.0 * kPi * beta * ref};
}

double row_amplitude(const ChirpPlan& plan, int m, int N) {
    if (plan.amplitude.empty()) return 1.0;
    double acc = 0.0;
    for (int n = plan.region.start_subcarrier; n < plan.region.end_subcarrier; ++n) acc += plan.amplitude_at(m, n, N);
    return acc / (plan.region.end_subcarrier - plan.region.start_subcarrier);
}

// Chirp pieces of symbol m, with per-piece (q, beta, ref).
struct ChirpSpan {
    double t0, t1, q, beta, ref;
};

std::vector<std::vector<ChirpSpan>> chirp_spans(const ChirpPlan& plan, const WaveformConfig& cfg) {
    const double To = cfg.symbol_duration_s();
    const double T = cfg.useful_duration_s();
    const double tcp = cfg.cp_samples / cfg.sample_rate_hz();
    std::vector<std::vector<ChirpSpan>> spans(std::size_t(cfg.n_symbols));
    for (const auto& seg : waveform::chirp_segments(plan, cfg)) {
        for (int m = seg.first_symbol; m < seg.first_symbol + seg.n_symbols; ++m) {
            const double q = row_amplitude(plan, m, cfg.n_subcarriers);
            const double s0 = m * To;
            if (seg.cyclic) {
                const double u = s0 + tcp;
                if (cfg.cp_samples > 0) spans[m].push_back({s0, u, q, seg.rate_hz_per_s, u - T});
                spans[m].push_back({u, u + T, q, seg.rate_hz_per_s, u});
            } else {
                spans[m].push_back({s0, s0 + To, q, seg.rate_hz_per_s, seg.first_symbol * To});
            }
        }
    }
    return spans;
}

} // namespace

ContinuousWaveform ofdm_model(const ResourceGrid& grid, const WaveformConfig& cfg) {
    cfg.validate();
    require(grid.n_symbols == cfg.n_symbols && grid.n_subcarriers == cfg.n_subcarriers, "grid/config mismatch");
    ContinuousWaveform w;
    const double To = cfg.symbol_duration_s();
    for (int m = 0; m < cfg.n_symbols; ++m) w.pieces.push_back({m * To, (m + 1) * To, ofdm_atoms(grid, cfg, m, nullptr)});
    return w;
}

ContinuousWaveform chirp_model(const ChirpPlan& plan, const WaveformConfig& cfg) {
    cfg.validate();
    ContinuousWaveform w;
    for (const auto& row : chirp_spans(plan, cfg))
        for (const auto& s : row) w.pieces.push_back({s.t0, s.t1, {chirp_atom(s.q, s.beta, s.ref)}});
    return w;
}

ContinuousWaveform cm_model(const ResourceGrid& grid, const ChirpPlan& plan, const WaveformConfig& cfg) {
    cfg.validate();
    require(grid.n_symbols == cfg.n_symbols && grid.n_subcarriers == cfg.n_subcarriers, "grid/config mismatch");
    const auto spans = chirp_spans(plan, cfg);
    const double To = cfg.symbol_duration_s();
    const int N = cfg.n_subcarriers;
    ContinuousWaveform w;
    for (int m = 0; m < cfg.n_symbols; ++m) {
        if (spans[m].empty()) {
            w.pieces.push_back({m * To, (m + 1) * To, ofdm_atoms(grid, cfg, m, nullptr)});
            continue;
        }
        std::vector<double> cov(std::size_t(N), 0.0), unc(std::size_t(N), 1.0);
        for (int n = 0; n < N; ++n)
            if (plan.region.covers(m, n)) {
                cov[n] = plan.amplitude_at(m, n, N);
                unc[n] = 0.0;
            }
        const auto plain = ofdm_atoms(grid, cfg, m, &unc);
        const auto chirped = ofdm_atoms(grid, cfg, m, &cov);
        for (const auto& s : spans[m]) {
            Piece p{s.t0, s.t1, plain};
            const Atom c = chirp_atom(1.0, s.beta, s.ref);
            for (const auto& a : chirped) p.atoms.push_back({a.g * c.g, c.a2, a.a1 + c.a1});
            w.pieces.push_back(std::move(p));
        }
    }
    return w;
}

ContinuousWaveform aac_model(const ResourceGrid& grid, const ChirpPlan& plan, const WaveformConfig& cfg,
                             double alpha) {
    require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
    const auto spans = chirp_spans(plan, cfg);
    const ContinuousWaveform s = ofdm_model(grid, cfg);
    const double To = cfg.symbol_duration_s();
    ContinuousWaveform w;
    for (int m = 0; m < cfg.n_symbols; ++m) {
        std::vector<Atom> base = s.pieces[m].atoms;
        for (auto& a : base) a.g *= (1.0 - alpha);
        if (spans[m].empty()) {
            w.pieces.push_back({m * To, (m + 1) * To, base});
            continue;
        }
        for (const auto& sp : spans[m]) {
            Piece p{sp.t0, sp.t1, base};
            Atom c = chirp_atom(sp.q, sp.beta, sp.ref);
            c.g *= alpha;
            p.atoms.push_back(c);
            w.pieces.push_back(std::move(p));
        }
    }
    return w;
}

Complex cross_ambiguity(const ContinuousWaveform& a, const ContinuousWaveform& b, double tau, double fd) {
    const double wd = 2.0 * kPi * fd;
    Complex total{};
    for (const auto& pa : a.pieces) {
        for (const auto& pb : b.pieces) {
            const OverlapWindow ov = interval_overlap(pa.t_begin, pa.t_end, pb.t_begin, pb.t_end, tau);
            if (ov.empty || ov.t_d <= 0.0) continue;
            const double lo = ov.t_a - ov.t_d, hi = ov.t_a + ov.t_d;
            for (const auto& y : pb.atoms) {
                // conj(y(t - tau)) = conj(g) e^{-j(a2 tau^2 - a1 tau)} e^{-j(a2 t^2 + (a1 - 2 a2 tau) t)}
                const Complex gy = std::conj(y.g) * std::polar(1.0, -(y.a2 * tau * tau - y.a1 * tau));
                const double by = -y.a1 + 2.0 * y.a2 * tau + wd;
                for (const auto& x : pa.atoms) {
                    const double A = x.a2 - y.a2;
                    const double B = x.a1 + by;
                    Complex q;
                    if (A == 0.0) q = std::polar(2.0 * ov.t_d * sinc(B * ov.t_d), B * ov.t_a);
                    else q = quad_phase_integral(A, B, lo, hi);
                    total += x.g * gy * q;
                }
            }
        }
    }
    return total;
}

AacAmbiguity::AacAmbiguity(const WaveformConfig& cfg, const ChirpPlan& plan, const ResourceGrid& grid, double alpha)
    : s_(ofdm_model(grid, cfg)), c_(chirp_model(plan, cfg)), alpha_(alpha) {
    require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
}

AacTerms AacAmbiguity::terms(double tau, double fd) const {
    return {cross_ambiguity(c_, c_, tau, fd), cross_ambiguity(s_, c_, tau, fd), cross_ambiguity(c_, s_, tau, fd),
            cross_ambiguity(s_, s_, tau, fd)};
}

Complex AacAmbiguity::operator()(double tau, double fd) const {
    const double a = alpha_;
    Complex out{};
    if (a < 1.0) out += (1.0 - a) * (1.0 - a) * cross_ambiguity(s_, s_, tau, fd);
    if (a > 0.0 && a < 1.0) out += a * (1.0 - a) * (cross_ambiguity(s_, c_, tau, fd) + cross_ambiguity(c_, s_, tau, fd));
    if (a > 0.0) out += a * a * cross_ambiguity(c_, c_, tau, fd);
    return out;
}

Complex aac_ambiguity_analytic(const WaveformConfig& cfg, const ChirpPlan& plan, const ResourceGrid& grid,
                               double alpha, double tau, double fd) {
    return AacAmbiguity(cfg, plan, grid, alpha)(tau, fd);
}

Complex cm_ambiguity_analytic(const WaveformConfig& cfg, const ChirpPlan& plan, const ResourceGrid& grid,
                              double tau, double fd) {
    const auto w = cm_model(grid, plan, cfg);
    return cross_ambiguity(w, w, tau, fd);
}

TimeSignal sample_model(const ContinuousWaveform& w, double sample_rate_hz) {
    require(sample_rate_hz > 0.0, "sample rate must be positive");
    const double h = 1.0 / sample_rate_hz;
    const auto n = std::size_t(std::llround(w.duration() * sample_rate_hz));
    TimeSignal x;
    x.sample_rate_hz = sample_rate_hz;
    x.t0_s = 0.5 * h;
    x.samples.resize(n);
#pragma omp parallel for schedule(static)
    for (std::size_t l = 0; l < n; ++l) x.samples[l] = w.eval((double(l) + 0.5) * h);
    return x;
}

namespace {

std::vector<long> integer_lags(const TimeSignal& x, std::span<const double> delay_axis_s) {
    std::vector<long> d;
    d.reserve(delay_axis_s.size());
    for (double tau : delay_axis_s) {
        const double v = tau * x.sample_rate_hz;
        const double r = std::round(v);
        require(std::abs(v - r) <= 1e-6 * std::max(1.0, std::abs(v)), "delay is not a whole number of samples");
        require(std::abs(r) < double(x.size()), "delay exceeds signal support");
        d.push_back(long(r));
    }
    return d;
}

void check_doppler(const TimeSignal& x, std::span<const double> doppler_axis_hz) {
    for (double f : doppler_axis_hz) require(std::abs(f) <= 0.5 * x.sample_rate_hz, "Doppler beyond Nyquist");
}

void lag_row(const TimeSignal& x, long d, std::span<const double> dop, CVector& out, std::size_t k, std::size_t nk) {
    const long L = long(x.size());
    const long l0 = std::max(0L, d), l1 = std::min(L, L + d);
    CVector prod(std::size_t(std::max(0L, l1 - l0)));
    for (long l = l0; l < l1; ++l) prod[std::size_t(l - l0)] = x.samples[std::size_t(l)] * std::conj(x.samples[std::size_t(l - d)]);
    const double fs = x.sample_rate_hz;
    for (std::size_t i = 0; i < dop.size(); ++i) {
        const double w = 2.0 * kPi * dop[i] / fs;
        const Complex step = std::polar(1.0, w);
        Complex acc{}, rot{};
        for (std::size_t j = 0; j < prod.size(); ++j) {
            // re-seed the rotation every 512 samples to bound drift
            if (j % 512 == 0) rot = std::polar(1.0, 2.0 * kPi * dop[i] * x.t0_s + w * double(l0 + long(j)));
            acc += prod[j] * rot;
            rot *= step;
        }
        out[i * nk + k] = acc / fs;
    }
}

} // namespace

CVector ambiguity_numeric_raw(const TimeSignal& x, std::span<const double> delay_axis_s,
                              std::span<const double> doppler_axis_hz) {
    require(!x.samples.empty() && x.sample_rate_hz > 0.0, "empty signal");
    const auto lags = integer_lags(x, delay_axis_s);
    check_doppler(x, doppler_axis_hz);
    const std::size_t nk = lags.size();
    CVector out(nk * doppler_axis_hz.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t k = 0; k < nk; ++k) lag_row(x, lags[k], doppler_axis_hz, out, k, nk);
    return out;
}

CVector ambiguity_numeric_raw_serial(const TimeSignal& x, std::span<const double> delay_axis_s,
                                     std::span<const double> doppler_axis_hz) {
    require(!x.samples.empty() && x.sample_rate_hz > 0.0, "empty signal");
    const auto lags = integer_lags(x, delay_axis_s);
    check_doppler(x, doppler_axis_hz);
    const std::size_t nk = lags.size();
    const long L = long(x.size());
    const double fs = x.sample_rate_hz;
    CVector out(nk * doppler_axis_hz.size());
    for (std::size_t i = 0; i < doppler_axis_hz.size(); ++i) {
        for (std::size_t k = 0; k < nk; ++k) {
            const long d = lags[k];
            Complex acc{};
            for (long l = std::max(0L, d); l < std::min(L, L + d); ++l) {
                const double t = x.t0_s + double(l) / fs;
                acc += x.samples[std::size_t(l)] * std::conj(x.samples[std::size_t(l - d)]) *
                       std::polar(1.0, 2.0 * kPi * doppler_axis_hz[i] * t);
            }
            out[i * nk + k] = acc / fs;
        }
    }
    return out;
}

AmbiguitySurface make_surface(const CVector& raw, std::span<const double> delay_axis_s,
                              std::span<const double> doppler_axis_hz) {
    require(raw.size() == delay_axis_s.size() * doppler_axis_hz.size() && !raw.empty(), "surface size mismatch");
    AmbiguitySurface s;
    s.delay_axis_s.assign(delay_axis_s.begin(), delay_axis_s.end());
    s.doppler_axis_hz.assign(doppler_axis_hz.begin(), doppler_axis_hz.end());
    s.magnitude.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        s.magnitude[i] = std::abs(raw[i]);
        s.peak = std::max(s.peak, s.magnitude[i]);
    }
    require(s.peak > 0.0, "ambiguity surface is identically zero");
    for (auto& v : s.magnitude) v /= s.peak;
    return s;
}

AmbiguitySurface ambiguity_numeric(const TimeSignal& x, std::span<const double> delay_axis_s,
                                   std::span<const double> doppler_axis_hz) {
    return make_surface(ambiguity_numeric_raw(x, delay_axis_s, doppler_axis_hz), delay_axis_s, doppler_axis_hz);
}

CVector analytic_raw(const ContinuousWaveform& w, std::span<const double> delay_axis_s,
                     std::span<const double> doppler_axis_hz) {
    const std::size_t nk = delay_axis_s.size(), nf = doppler_axis_hz.size();
    CVector out(nk * nf);
#pragma omp parallel for schedule(dynamic) collapse(2)
    for (std::size_t i = 0; i < nf; ++i)
        for (std::size_t k = 0; k < nk; ++k)
            out[i * nk + k] = cross_ambiguity(w, w, delay_axis_s[k], doppler_axis_hz[i]);
    return out;
}

CVector analytic_raw_serial(const ContinuousWaveform& w, std::span<const double> delay_axis_s,
                            std::span<const double> doppler_axis_hz) {
    const std::size_t nk = delay_axis_s.size(), nf = doppler_axis_hz.size();
    CVector out(nk * nf);
    for (std::size_t i = 0; i < nf; ++i)
        for (std::size_t k = 0; k < nk; ++k)
            out[i * nk + k] = cross_ambiguity(w, w, delay_axis_s[k], doppler_axis_hz[i]);
    return out;
}

std::vector<double> default_delay_axis(const WaveformConfig& cfg) {
    const long L = long(cfg.symbol_length());
    std::vector<double> ax;
    for (long k = -L + 1; k < L; ++k) ax.push_back(double(k) / cfg.sample_rate_hz());
    return ax;
}

std::vector<double> default_doppler_axis(const WaveformConfig& cfg) {
    const double span = 2.0 / cfg.symbol_duration_s();
    const double step = 2.0 * span / 128.0;
    std::vector<double> ax;
    for (int i = -64; i < 64; ++i) ax.push_back(i * step);
    return ax;
}

double mainlobe_width(const AmbiguitySurface& surface, Cut cut) {
    const bool zd = cut == Cut::ZeroDoppler;
    const auto& fixed_axis = zd ? surface.doppler_axis_hz : surface.delay_axis_s;
    const auto& axis = zd ? surface.delay_axis_s : surface.doppler_axis_hz;
    require(axis.size() >= 3, "cut axis too short");
    std::size_t z = fixed_axis.size();
    double scale = 0.0;
    for (double v : fixed_axis) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < fixed_axis.size(); ++i)
        if (std::abs(fixed_axis[i]) <= 1e-12 * std::max(scale, 1e-300)) z = i;
    require(z < fixed_axis.size(), "surface does not contain the requested cut");

    std::vector<double> p(axis.size());
    for (std::size_t k = 0; k < axis.size(); ++k) {
        const double m = zd ? surface.at(z, k) : surface.at(k, z);
        p[k] = m * m;
    }
    const std::size_t peak = std::size_t(std::max_element(p.begin(), p.end()) - p.begin());
    const double half = 0.5 * p[peak];

    std::size_t r = peak;
    while (r + 1 < p.size() && p[r + 1] >= half) ++r;
    require(r + 1 < p.size(), "mainlobe wider than the axis");
    std::size_t l = peak;
    while (l > 0 && p[l - 1] >= half) --l;
    require(l > 0, "mainlobe wider than the axis");

    auto cross = [&](std::size_t inside, std::size_t outside) {
        const double f = (p[inside] - half) / (p[inside] - p[outside]);
        return axis[inside] + f * (axis[outside] - axis[inside]);
    };
    return cross(r, r + 1) - cross(l, l - 1);
}

} // namespace isac::ambiguity
