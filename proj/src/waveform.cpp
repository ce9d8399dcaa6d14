#include "isac/waveform.hpp"

#include "isac/fft.hpp"
#include "isac/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace isac::waveform {

int default_cp_samples(int n_subcarriers) {
    return int(std::lround(n_subcarriers * kCpDurationUs / kUsefulDurationUs));
}

void WaveformConfig::validate() const {
    require(n_subcarriers > 0, "n_subcarriers must be positive");
    require(subcarrier_spacing_hz > 0.0 && std::isfinite(subcarrier_spacing_hz),
            "subcarrier_spacing_hz must be positive");
    require(cp_samples >= 0, "cp_samples must be non-negative");
    require(n_symbols > 0, "n_symbols must be positive");
    require(carrier_hz > 0.0 && std::isfinite(carrier_hz), "carrier_hz must be positive");
    require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
}

WaveformConfig WaveformConfig::nr(int n_subcarriers, int n_symbols) {
    WaveformConfig cfg;
    cfg.n_subcarriers = n_subcarriers;
    cfg.cp_samples = default_cp_samples(n_subcarriers);
    cfg.n_symbols = n_symbols;
    return cfg;
}

ResourceGrid::ResourceGrid(int m, int n)
    : n_symbols(m), n_subcarriers(n), symbols(std::size_t(m) * n), data_mask(std::size_t(m) * n, 0) {
    require(m > 0 && n > 0, "grid dimensions must be positive");
}

std::size_t ResourceGrid::data_count() const {
    return std::size_t(std::count(data_mask.begin(), data_mask.end(), std::uint8_t(1)));
}

bool ChirpRegion::covers(int m, int n) const {
    if (m < start_symbol || m >= start_symbol + n_symbols) return false;
    if (n < start_subcarrier || n >= end_subcarrier) return false;
    int k = n - comb_offset;
    return ((k % comb_step) + comb_step) % comb_step == 0;
}

double ChirpPlan::amplitude_at(int m, int n, int n_subcarriers) const {
    if (amplitude.empty()) return 1.0;
    return amplitude[std::size_t(m) * n_subcarriers + n];
}

double ChirpPlan::bandwidth_hz(const WaveformConfig& cfg) const {
    return (region.end_subcarrier - region.start_subcarrier) * cfg.subcarrier_spacing_hz;
}

double ChirpPlan::chirp_duration_s(const WaveformConfig& cfg) const {
    switch (mode) {
    case ChirpMode::PerSymbol: return cfg.useful_duration_s();
    case ChirpMode::PerSlot: return region.n_symbols * cfg.symbol_duration_s();
    case ChirpMode::Hybrid: return kSymbolsPerSlot * cfg.symbol_duration_s();
    }
    return 0.0;
}

void ChirpPlan::validate(const WaveformConfig& cfg) const {
    const auto& r = region;
    require(r.start_subcarrier >= 0 && r.end_subcarrier > r.start_subcarrier &&
                r.end_subcarrier <= cfg.n_subcarriers,
            "chirp region subcarriers out of bounds");
    require(r.start_symbol >= 0 && r.n_symbols >= 1 && r.start_symbol + r.n_symbols <= cfg.n_symbols,
            "chirp region symbols out of bounds");
    require(r.comb_step >= 1 && r.comb_offset >= 0 && r.comb_offset < r.comb_step,
            "invalid comb layout");
    if (!amplitude.empty()) {
        require(amplitude.size() == std::size_t(cfg.n_symbols) * cfg.n_subcarriers,
                "amplitude must be M x N");
        for (double q : amplitude) require(std::isfinite(q) && q >= 0.0, "amplitude must be finite and >= 0");
    }
    if (mode == ChirpMode::Hybrid) {
        require(r.n_symbols % kSymbolsPerSlot == 0, "hybrid region must span whole slots");
        require(hybrid_pattern.size() == std::size_t(r.n_symbols / kSymbolsPerSlot),
                "hybrid pattern needs one entry per slot");
    }
    double expected = chirp_rate(bandwidth_hz(cfg), chirp_duration_s(cfg));
    require(std::abs(rate_hz_per_s - expected) <= 1e-9 * std::abs(expected),
            "chirp rate inconsistent with region and duration");
}

double chirp_rate(double bandwidth_hz, double duration_s) {
    require(duration_s > 0.0, "chirp duration must be positive");
    return bandwidth_hz / duration_s;
}

std::vector<HybridSlot> default_hybrid_pattern(int n_slots) {
    std::vector<HybridSlot> p(std::size_t(std::max(n_slots, 0)), HybridSlot::None);
    for (int k = 0; k < n_slots; ++k) {
        if (k % 4 == 0) p[k] = HybridSlot::Slot;
        else if (k % 4 == 1) p[k] = HybridSlot::Symbol;
    }
    return p;
}

ChirpPlan make_chirp_plan(const WaveformConfig& cfg, ChirpMode mode, const ChirpRegion& region,
                          std::vector<HybridSlot> pattern) {
    ChirpPlan plan;
    plan.mode = mode;
    plan.region = region;
    if (mode == ChirpMode::Hybrid && pattern.empty())
        pattern = default_hybrid_pattern(region.n_symbols / kSymbolsPerSlot);
    plan.hybrid_pattern = std::move(pattern);
    plan.rate_hz_per_s = chirp_rate(plan.bandwidth_hz(cfg), plan.chirp_duration_s(cfg));
    plan.validate(cfg);
    return plan;
}

ChirpPlan full_band_plan(const WaveformConfig& cfg, ChirpMode mode) {
    ChirpRegion r;
    r.start_subcarrier = 0;
    r.end_subcarrier = cfg.n_subcarriers;
    r.start_symbol = 0;
    r.n_symbols = cfg.n_symbols;
    return make_chirp_plan(cfg, mode, r);
}

std::vector<ChirpSegment> chirp_segments(const ChirpPlan& plan, const WaveformConfig& cfg) {
    plan.validate(cfg);
    const auto& r = plan.region;
    std::vector<ChirpSegment> segs;
    switch (plan.mode) {
    case ChirpMode::PerSymbol:
        for (int m = r.start_symbol; m < r.start_symbol + r.n_symbols; ++m)
            segs.push_back({m, 1, true, plan.rate_hz_per_s});
        break;
    case ChirpMode::PerSlot:
        segs.push_back({r.start_symbol, r.n_symbols, false, plan.rate_hz_per_s});
        break;
    case ChirpMode::Hybrid: {
        double sym_rate = chirp_rate(plan.bandwidth_hz(cfg), cfg.useful_duration_s());
        for (std::size_t k = 0; k < plan.hybrid_pattern.size(); ++k) {
            int first = r.start_symbol + int(k) * kSymbolsPerSlot;
            if (plan.hybrid_pattern[k] == HybridSlot::Slot)
                segs.push_back({first, kSymbolsPerSlot, false, plan.rate_hz_per_s});
            else if (plan.hybrid_pattern[k] == HybridSlot::Symbol)
                segs.push_back({first, 1, true, sym_rate});
        }
        break;
    }
    }
    return segs;
}

CVector qpsk_map(std::span<const std::uint8_t> bits) {
    require(bits.size() % 2 == 0, "QPSK needs an even number of bits");
    const double a = 1.0 / std::sqrt(2.0);
    CVector out(bits.size() / 2);
    // first bit picks the imaginary sign, second the real sign
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = {bits[2 * i + 1] ? -a : a, bits[2 * i] ? -a : a};
    return out;
}

Bits qpsk_demap(std::span<const Complex> symbols) {
    Bits out(symbols.size() * 2);
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        out[2 * i] = symbols[i].imag() < 0.0 ? 1 : 0;
        out[2 * i + 1] = symbols[i].real() < 0.0 ? 1 : 0;
    }
    return out;
}

Complex reference_symbol(int m, int n) {
    std::uint64_t h = rng::splitmix64((std::uint64_t(std::uint32_t(m)) << 32) ^ std::uint32_t(n));
    std::uint8_t b[2] = {std::uint8_t(h & 1U), std::uint8_t((h >> 1) & 1U)};
    return qpsk_map(b)[0];
}

ResourceGrid random_qpsk_grid(const WaveformConfig& cfg, std::mt19937_64& eng) {
    ResourceGrid g(cfg.n_symbols, cfg.n_subcarriers);
    Bits bits = rng::random_bits(eng, g.symbols.size() * 2);
    g.symbols = qpsk_map(bits);
    std::fill(g.data_mask.begin(), g.data_mask.end(), std::uint8_t(1));
    return g;
}

namespace {

void check_grid(const ResourceGrid& grid, const WaveformConfig& cfg) {
    cfg.validate();
    require(grid.n_symbols == cfg.n_symbols && grid.n_subcarriers == cfg.n_subcarriers,
            "grid dimensions do not match the waveform config");
    require(grid.symbols.size() == std::size_t(cfg.n_symbols) * cfg.n_subcarriers,
            "grid storage size mismatch");
}

double mean_row_amplitude(const ChirpPlan& plan, int m, int n_subcarriers) {
    if (plan.amplitude.empty()) return 1.0;
    double acc = 0.0;
    for (int n = plan.region.start_subcarrier; n < plan.region.end_subcarrier; ++n)
        acc += plan.amplitude_at(m, n, n_subcarriers);
    return acc / (plan.region.end_subcarrier - plan.region.start_subcarrier);
}

} // namespace

TimeSignal ofdm_modulate(const ResourceGrid& grid, const WaveformConfig& cfg) {
    check_grid(grid, cfg);
    const std::size_t N = std::size_t(cfg.n_subcarriers);
    const std::size_t cp = std::size_t(cfg.cp_samples);
    const std::size_t L = cfg.symbol_length();
    TimeSignal out;
    out.sample_rate_hz = cfg.sample_rate_hz();
    out.samples.assign(cfg.frame_length(), Complex{});
    CVector buf(N);
    for (int m = 0; m < cfg.n_symbols; ++m) {
        auto row = grid.row(m);
        std::copy(row.begin(), row.end(), buf.begin());
        fft::inverse_unitary(buf);
        Complex* dst = out.samples.data() + std::size_t(m) * L;
        std::copy(buf.end() - std::ptrdiff_t(cp), buf.end(), dst);
        std::copy(buf.begin(), buf.end(), dst + cp);
    }
    return out;
}

TimeSignal generate_chirp(const ChirpPlan& plan, const WaveformConfig& cfg) {
    cfg.validate();
    auto segs = chirp_segments(plan, cfg);
    const std::size_t N = std::size_t(cfg.n_subcarriers);
    const std::size_t cp = std::size_t(cfg.cp_samples);
    const std::size_t L = cfg.symbol_length();
    const double fs = cfg.sample_rate_hz();
    TimeSignal out;
    out.sample_rate_hz = fs;
    out.samples.assign(cfg.frame_length(), Complex{});
    for (const auto& seg : segs) {
        Complex* base = out.samples.data() + std::size_t(seg.first_symbol) * L;
        if (seg.cyclic) {
            double q = mean_row_amplitude(plan, seg.first_symbol, cfg.n_subcarriers);
            for (std::size_t j = 0; j < N; ++j) {
                double t = double(j) / fs;
                base[cp + j] = q * std::polar(1.0, kPi * seg.rate_hz_per_s * t * t);
            }
            std::copy(base + N, base + N + cp, base);
        } else {
            std::size_t len = std::size_t(seg.n_symbols) * L;
            for (std::size_t l = 0; l < len; ++l) {
                int m = seg.first_symbol + int(l / L);
                double q = mean_row_amplitude(plan, m, cfg.n_subcarriers);
                double t = double(l) / fs;
                base[l] = q * std::polar(1.0, kPi * seg.rate_hz_per_s * t * t);
            }
        }
    }
    return out;
}

TimeSignal compose_aac(const TimeSignal& ofdm, const TimeSignal& chirp, double alpha) {
    require(ofdm.size() == chirp.size(), "AAC inputs must have equal length");
    require(ofdm.sample_rate_hz == chirp.sample_rate_hz, "AAC inputs must share a sample rate");
    require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
    TimeSignal out;
    out.sample_rate_hz = ofdm.sample_rate_hz;
    out.t0_s = ofdm.t0_s;
    out.samples.resize(ofdm.size());
    for (std::size_t l = 0; l < ofdm.size(); ++l)
        out.samples[l] = (1.0 - alpha) * ofdm.samples[l] + alpha * chirp.samples[l];
    return out;
}

TimeSignal compose_cm(const ResourceGrid& grid, const ChirpPlan& plan, const WaveformConfig& cfg) {
    check_grid(grid, cfg);
    auto segs = chirp_segments(plan, cfg);
    std::vector<std::uint8_t> chirped(std::size_t(cfg.n_symbols), 0);
    for (const auto& s : segs)
        for (int m = s.first_symbol; m < s.first_symbol + s.n_symbols; ++m) chirped[m] = 1;

    ResourceGrid covered = grid;
    ResourceGrid uncovered = grid;
    for (int m = 0; m < cfg.n_symbols; ++m)
        for (int n = 0; n < cfg.n_subcarriers; ++n) {
            if (chirped[m] && plan.region.covers(m, n)) {
                covered.at(m, n) *= plan.amplitude_at(m, n, cfg.n_subcarriers);
                uncovered.at(m, n) = 0.0;
            } else {
                covered.at(m, n) = 0.0;
            }
        }

    ChirpPlan unit = plan;
    unit.amplitude.clear();
    TimeSignal c = generate_chirp(unit, cfg);
    TimeSignal s_cov = ofdm_modulate(covered, cfg);
    TimeSignal out = ofdm_modulate(uncovered, cfg);
    for (std::size_t l = 0; l < out.size(); ++l)
        if (c.samples[l] != Complex{}) out.samples[l] += c.samples[l] * s_cov.samples[l];
    return out;
}

TimeSignal build_frame(const ResourceGrid& grid, const ChirpPlan& plan, const WaveformConfig& cfg,
                       Scheme scheme) {
    switch (scheme) {
    case Scheme::OFDM:
        return ofdm_modulate(grid, cfg);
    case Scheme::AAC:
        require(plan.region.comb_step == 1, "comb chirp placement is only defined for CM");
        return compose_aac(ofdm_modulate(grid, cfg), generate_chirp(plan, cfg), cfg.alpha);
    case Scheme::CM:
        return compose_cm(grid, plan, cfg);
    }
    throw InvalidInput("unknown scheme");
}

std::span<const Complex> useful_part(const TimeSignal& x, const WaveformConfig& cfg, int m) {
    require(m >= 0 && x.size() >= (std::size_t(m) + 1) * cfg.symbol_length(), "symbol index out of range");
    return {x.samples.data() + std::size_t(m) * cfg.symbol_length() + cfg.cp_samples,
            std::size_t(cfg.n_subcarriers)};
}

double papr_db(std::span<const Complex> x) {
    require(!x.empty(), "PAPR of an empty signal");
    double peak = 0.0, sum = 0.0;
    for (const auto& v : x) {
        double p = std::norm(v);
        peak = std::max(peak, p);
        sum += p;
    }
    require(sum > 0.0, "PAPR of an all-zero signal");
    return 10.0 * std::log10(peak / (sum / double(x.size())));
}

std::vector<double> papr_db(const TimeSignal& x, PaprScope per, const WaveformConfig& cfg) {
    if (per == PaprScope::Whole) return {papr_db(std::span<const Complex>(x.samples))};
    require(x.size() % cfg.symbol_length() == 0 && x.size() > 0, "signal is not a whole number of symbols");
    int M = int(x.size() / cfg.symbol_length());
    std::vector<double> out(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) out[m] = papr_db(useful_part(x, cfg, m));
    return out;
}

double alpha_threshold(double g, double e) {
    require(g >= 1.0, "peak factor g must be at least 1");
    require(e >= 0.0 && e <= 1.0, "correlation magnitude e must lie in [0, 1]");
    double den = g * g + 2.0 * g - 1.0 + 2.0 * g * g * e;
    require(den > 0.0, "threshold denominator is not positive");
    return 2.0 * g * (g * e + 1.0) / den;
}

double papr_bound(double alpha, double g, double e) {
    double num = (1.0 - alpha) * g + alpha;
    double den = (1.0 - alpha) * (1.0 - alpha) + alpha * alpha - 2.0 * alpha * (1.0 - alpha) * e;
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    return num * num / den;
}

CompositeStats composite_stats(std::span<const Complex> s, std::span<const Complex> c, double alpha) {
    require(s.size() == c.size() && !s.empty(), "blocks must be nonempty and equal length");
    const double n = double(s.size());
    double ps = 0.0;
    for (const auto& v : s) ps += std::norm(v);
    require(ps > 0.0, "OFDM block is all zero");
    const double k = 1.0 / std::sqrt(ps / n);
    CompositeStats st;
    double peak_a = 0.0;
    for (std::size_t l = 0; l < s.size(); ++l) {
        Complex sl = s[l] * k;
        st.g = std::max(st.g, std::abs(sl));
        st.rho += sl * std::conj(c[l]);
        peak_a = std::max(peak_a, std::norm((1.0 - alpha) * sl + alpha * c[l]));
    }
    st.rho /= n;
    st.e = std::abs(st.rho);
    double G = (1.0 - alpha) * (1.0 - alpha) + alpha * alpha + 2.0 * alpha * (1.0 - alpha) * st.rho.real();
    st.papr_u = peak_a / G;
    return st;
}

std::string to_string(Scheme s) {
    switch (s) {
    case Scheme::OFDM: return "OFDM";
    case Scheme::AAC: return "AAC";
    case Scheme::CM: return "CM";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "OFDM" || s == "ofdm") return Scheme::OFDM;
    if (s == "AAC" || s == "aac") return Scheme::AAC;
    if (s == "CM" || s == "cm") return Scheme::CM;
    throw InvalidInput("unknown scheme '" + s + "' (expected OFDM, AAC or CM)");
}

std::string to_string(ChirpMode m) {
    switch (m) {
    case ChirpMode::PerSymbol: return "symbol";
    case ChirpMode::PerSlot: return "slot";
    case ChirpMode::Hybrid: return "hybrid";
    }
    return "?";
}

ChirpMode chirp_mode_from_string(const std::string& s) {
    if (s == "symbol") return ChirpMode::PerSymbol;
    if (s == "slot") return ChirpMode::PerSlot;
    if (s == "hybrid") return ChirpMode::Hybrid;
    throw InvalidInput("unknown placement '" + s + "' (expected symbol, slot or hybrid)");
}

} // namespace isac::waveform
