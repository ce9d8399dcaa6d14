#include "isac/comms.hpp"

#include "isac/fft.hpp"
#include "isac/rng.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>

namespace isac::comms {

namespace {

inline std::uint8_t parity(unsigned v) { return std::uint8_t(std::popcount(v) & 1); }

constexpr int kStates = 64;

bool is_flat(const std::vector<PathTap>& taps) {
    return taps.size() == 1 && taps[0].delay_samples == 0.0 && taps[0].doppler_hz == 0.0;
}

} // namespace

Bits conv_encode(std::span<const std::uint8_t> bits) {
    const CodecConfig cc;
    Bits out;
    out.reserve(2 * (bits.size() + kTailBits));
    unsigned state = 0;
    auto push = [&](unsigned u) {
        unsigned r = (u << 6) | state;
        out.push_back(parity(r & cc.g0));
        out.push_back(parity(r & cc.g1));
        state = r >> 1;
    };
    for (auto b : bits) push(b & 1U);
    for (int i = 0; i < kTailBits; ++i) push(0);
    return out;
}

Bits viterbi_decode(std::span<const std::uint8_t> coded) {
    require(coded.size() % 2 == 0 && coded.size() >= 2 * (kTailBits + 1),
            "coded length must be even and hold at least one bit plus the tail");
    const CodecConfig cc;
    const std::size_t T = coded.size() / 2;

    // expected output pair for register value r (7 bits)
    std::array<std::uint8_t, 128> out_bits{};
    for (unsigned r = 0; r < 128; ++r) out_bits[r] = std::uint8_t((parity(r & cc.g0) << 1) | parity(r & cc.g1));

    const unsigned kInf = std::numeric_limits<unsigned>::max() / 2;
    std::array<unsigned, kStates> pm{}, next{};
    pm.fill(kInf);
    pm[0] = 0;
    std::vector<std::uint8_t> decision(T * kStates);

    for (std::size_t t = 0; t < T; ++t) {
        const std::uint8_t rx = std::uint8_t((coded[2 * t] << 1) | coded[2 * t + 1]);
        for (unsigned ns = 0; ns < kStates; ++ns) {
            const unsigned u = ns >> 5;
            unsigned best = kInf;
            std::uint8_t pick = 0;
            for (unsigned b = 0; b < 2; ++b) {
                const unsigned s = ((ns & 31U) << 1) | b;
                if (pm[s] >= kInf) continue;
                const unsigned r = (u << 6) | s;
                const unsigned m = pm[s] + unsigned(std::popcount(unsigned(out_bits[r] ^ rx)));
                if (m < best) {
                    best = m;
                    pick = std::uint8_t(b);
                }
            }
            next[ns] = best;
            decision[t * kStates + ns] = pick;
        }
        pm = next;
    }

    Bits decoded(T);
    unsigned ns = 0;  // zero-tail termination
    for (std::size_t t = T; t-- > 0;) {
        decoded[t] = std::uint8_t(ns >> 5);
        ns = ((ns & 31U) << 1) | decision[t * kStates + ns];
    }
    decoded.resize(T - kTailBits);
    return decoded;
}

CVector genie_csi(const std::vector<PathTap>& taps, const WaveformConfig& cfg) {
    cfg.validate();
    require(!taps.empty(), "channel needs at least one tap");
    const int N = cfg.n_subcarriers, M = cfg.n_symbols;
    const double fs = cfg.sample_rate_hz();
    const std::size_t L = cfg.symbol_length();
    CVector H(std::size_t(M) * N);
    for (const auto& tap : taps) {
        const Complex xi = channel::tap_gain(tap);
        const double w = 2.0 * kPi * tap.doppler_hz / fs;
        for (int m = 0; m < M; ++m) {
            Complex dop{1.0, 0.0};
            if (tap.doppler_hz != 0.0) {
                // mean rotation over the useful samples of symbol m
                const double l0 = double(std::size_t(m) * L + std::size_t(cfg.cp_samples));
                Complex acc{};
                for (int j = 0; j < N; ++j) acc += std::polar(1.0, w * (l0 + j));
                dop = acc / double(N);
            }
            for (int n = 0; n < N; ++n) {
                const double ns = n < N / 2 ? double(n) : double(n - N);
                H[std::size_t(m) * N + n] += xi * dop * std::polar(1.0, -2.0 * kPi * ns * tap.delay_samples / N);
            }
        }
    }
    return H;
}

TimeSignal dechirp(const TimeSignal& rx, const ChirpPlan& plan, Scheme scheme, double alpha,
                   const std::vector<PathTap>& csi, const WaveformConfig& cfg) {
    cfg.validate();
    require(rx.size() == cfg.frame_length(), "received frame length mismatch");
    if (scheme == Scheme::OFDM) return rx;

    if (scheme == Scheme::AAC) {
        require(alpha >= 0.0 && alpha < 1.0, "AAC dechirp needs alpha in [0, 1)");
        if (alpha == 0.0) return rx;
        TimeSignal hc = channel::apply_paths(waveform::generate_chirp(plan, cfg), csi);
        TimeSignal y = rx;
        const double k = 1.0 / (1.0 - alpha);
        for (std::size_t l = 0; l < y.size(); ++l) y.samples[l] = (rx.samples[l] - alpha * hc.samples[l]) * k;
        return y;
    }

    const auto& r = plan.region;
    require(r.comb_step == 1 && r.start_subcarrier == 0 && r.end_subcarrier == cfg.n_subcarriers,
            "CM dechirp needs a full-band, non-comb chirp");
    ChirpPlan unit = plan;
    unit.amplitude.clear();
    TimeSignal c = waveform::generate_chirp(unit, cfg);
    TimeSignal y = rx;

    if (is_flat(csi)) {
        for (std::size_t l = 0; l < y.size(); ++l)
            if (c.samples[l] != Complex{}) y.samples[l] *= std::conj(c.samples[l]);
        return y;
    }

    // Undo the channel per symbol, remove the chirp, then put the channel back.
    const CVector H = genie_csi(csi, cfg);
    const std::size_t N = std::size_t(cfg.n_subcarriers), cp = std::size_t(cfg.cp_samples);
    CVector buf(N);
    for (int m = 0; m < cfg.n_symbols; ++m) {
        auto cu = waveform::useful_part(c, cfg, m);
        if (std::all_of(cu.begin(), cu.end(), [](const Complex& v) { return v == Complex{}; })) continue;
        Complex* sym = y.samples.data() + std::size_t(m) * cfg.symbol_length();
        std::copy(sym + cp, sym + cp + N, buf.begin());
        fft::forward_unitary(buf);
        for (std::size_t n = 0; n < N; ++n) {
            const Complex h = H[std::size_t(m) * N + n];
            buf[n] = std::abs(h) > 0.0 ? buf[n] / h : Complex{};
        }
        fft::inverse_unitary(buf);
        for (std::size_t j = 0; j < N; ++j) buf[j] *= std::conj(cu[j]);
        fft::forward_unitary(buf);
        for (std::size_t n = 0; n < N; ++n) buf[n] *= H[std::size_t(m) * N + n];
        fft::inverse_unitary(buf);
        std::copy(buf.begin(), buf.end(), sym + cp);
        std::copy(buf.end() - std::ptrdiff_t(cp), buf.end(), sym);
    }
    return y;
}

DemodResult ofdm_demodulate(const TimeSignal& x, const WaveformConfig& cfg, std::span<const Complex> csi) {
    cfg.validate();
    require(x.size() == cfg.frame_length(), "signal length must be M(N + N_CP)");
    const std::size_t MN = std::size_t(cfg.n_symbols) * cfg.n_subcarriers;
    require(csi.empty() || csi.size() == MN, "csi must be empty or M x N");
    DemodResult res{ResourceGrid(cfg.n_symbols, cfg.n_subcarriers), std::vector<std::uint8_t>(MN, 0)};
    CVector buf(std::size_t(cfg.n_subcarriers));
    for (int m = 0; m < cfg.n_symbols; ++m) {
        auto u = waveform::useful_part(x, cfg, m);
        std::copy(u.begin(), u.end(), buf.begin());
        fft::forward_unitary(buf);
        for (int n = 0; n < cfg.n_subcarriers; ++n) {
            const std::size_t i = std::size_t(m) * cfg.n_subcarriers + n;
            Complex v = buf[std::size_t(n)];
            if (!csi.empty()) {
                if (std::abs(csi[i]) == 0.0) {
                    res.erasures[i] = 1;
                    v = 0.0;
                } else {
                    v /= csi[i];
                }
            }
            res.grid.symbols[i] = v;
        }
    }
    return res;
}

double spectral_efficiency(const LinkResult& result, double data_fraction, int bits_per_symbol,
                           double code_rate) {
    require(data_fraction > 0.0 && data_fraction <= 1.0, "data fraction must lie in (0, 1]");
    if (result.frames == 0) return 0.0;
    const double ok = 1.0 - double(result.frame_errors) / double(result.frames);
    return bits_per_symbol * code_rate * data_fraction * ok;
}

double ebn0_to_snr_db(double ebn0_db, int bits_per_symbol, double code_rate, double n_active, int N) {
    require(bits_per_symbol > 0 && code_rate > 0.0 && n_active > 0.0 && N > 0, "invalid link parameters");
    return ebn0_db + 10.0 * std::log10(bits_per_symbol * code_rate * n_active / N);
}

namespace {

bool is_pilot(int n, int pilot_step) { return pilot_step > 0 && n % pilot_step == 0; }

} // namespace

std::size_t data_elements(const WaveformConfig& cfg, int pilot_step) {
    require(pilot_step >= 0, "pilot step must be non-negative");
    std::size_t per_symbol = 0;
    for (int n = 0; n < cfg.n_subcarriers; ++n)
        if (!is_pilot(n, pilot_step)) ++per_symbol;
    return per_symbol * std::size_t(cfg.n_symbols);
}

std::size_t info_bits_per_frame(const WaveformConfig& cfg, int pilot_step) {
    std::size_t d = data_elements(cfg, pilot_step);
    require(d > std::size_t(kTailBits), "frame too small for the code tail");
    return d - kTailBits;
}

double data_fraction(const WaveformConfig& cfg, int pilot_step) {
    return double(data_elements(cfg, pilot_step)) / (double(cfg.n_symbols) * cfg.n_subcarriers);
}

ResourceGrid build_data_grid(std::span<const std::uint8_t> coded, const WaveformConfig& cfg, int pilot_step) {
    require(coded.size() == 2 * data_elements(cfg, pilot_step), "coded length does not fill the data elements");
    ResourceGrid g(cfg.n_symbols, cfg.n_subcarriers);
    CVector syms = waveform::qpsk_map(coded);
    std::size_t k = 0;
    for (int m = 0; m < cfg.n_symbols; ++m)
        for (int n = 0; n < cfg.n_subcarriers; ++n) {
            const std::size_t i = std::size_t(m) * cfg.n_subcarriers + n;
            if (is_pilot(n, pilot_step)) {
                g.symbols[i] = waveform::reference_symbol(m, n);
            } else {
                g.symbols[i] = syms[k++];
                g.data_mask[i] = 1;
            }
        }
    return g;
}

CVector extract_data(const ResourceGrid& grid, const ResourceGrid& layout) {
    require(grid.symbols.size() == layout.symbols.size(), "grid and layout sizes differ");
    CVector out;
    out.reserve(layout.data_count());
    for (std::size_t i = 0; i < layout.symbols.size(); ++i)
        if (layout.data_mask[i]) out.push_back(grid.symbols[i]);
    return out;
}

FrameOutcome simulate_frame(const LinkSetup& setup, double snr_db, std::uint64_t seed, std::uint64_t frame) {
    const auto& cfg = setup.cfg;
    auto eng = rng::stream(seed, frame);
    const std::size_t K = info_bits_per_frame(cfg, setup.pilot_step);
    Bits info = rng::random_bits(eng, K);
    Bits coded = conv_encode(info);
    ResourceGrid grid = build_data_grid(coded, cfg, setup.pilot_step);
    TimeSignal x = waveform::build_frame(grid, setup.plan, cfg, setup.scheme);

    channel::ChannelRealization ch;
    ch.taps = setup.multipath ? channel::multipath_profile(eng()) : std::vector<PathTap>{PathTap{}};
    ch.snr_db = snr_db;
    ch.seed = eng();
    TimeSignal rx = channel::apply_channel(x, ch, cfg);

    TimeSignal y = dechirp(rx, setup.plan, setup.scheme, cfg.alpha, ch.taps, cfg);
    const CVector H = genie_csi(ch.taps, cfg);
    DemodResult d = ofdm_demodulate(y, cfg, H);
    Bits hard = waveform::qpsk_demap(extract_data(d.grid, grid));
    Bits dec = viterbi_decode(hard);

    FrameOutcome out;
    out.bits = K;
    for (std::size_t i = 0; i < K; ++i) out.errors += dec[i] != info[i];
    return out;
}

namespace {

void check_setup(const LinkSetup& setup, int n_frames) {
    setup.cfg.validate();
    require(n_frames >= 1, "need at least one frame");
    if (setup.scheme != Scheme::OFDM) setup.plan.validate(setup.cfg);
    if (setup.scheme == Scheme::AAC) require(setup.cfg.alpha < 1.0, "AAC link needs alpha < 1");
    info_bits_per_frame(setup.cfg, setup.pilot_step);
}

LinkResult finish(const LinkSetup& setup, double ebn0_db, std::uint64_t bits, std::uint64_t errors,
                  std::uint64_t frames, std::uint64_t frame_errors) {
    LinkResult r;
    r.bits_tx = bits;
    r.bit_errors = errors;
    r.frames = frames;
    r.frame_errors = frame_errors;
    r.ber = bits ? double(errors) / double(bits) : 0.0;
    r.ebn0_db = ebn0_db;
    r.se_bits_per_s_per_hz = spectral_efficiency(r, data_fraction(setup.cfg, setup.pilot_step), 2, 0.5);
    return r;
}

double link_snr(const LinkSetup& setup, double ebn0_db) {
    const auto& cfg = setup.cfg;
    const double active = double(data_elements(cfg, setup.pilot_step)) / cfg.n_symbols;
    return ebn0_to_snr_db(ebn0_db, 2, 0.5, active, cfg.n_subcarriers);
}

} // namespace

LinkResult simulate_link(const LinkSetup& setup, double ebn0_db, int n_frames, std::uint64_t seed) {
    check_setup(setup, n_frames);
    const double snr = link_snr(setup, ebn0_db);
    std::uint64_t bits = 0, errors = 0, ferr = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : bits, errors, ferr)
    for (int f = 0; f < n_frames; ++f) {
        FrameOutcome o = simulate_frame(setup, snr, seed, std::uint64_t(f));
        bits += o.bits;
        errors += o.errors;
        ferr += o.errors > 0 ? 1 : 0;
    }
    return finish(setup, ebn0_db, bits, errors, std::uint64_t(n_frames), ferr);
}

LinkResult simulate_link_serial(const LinkSetup& setup, double ebn0_db, int n_frames, std::uint64_t seed) {
    check_setup(setup, n_frames);
    const double snr = link_snr(setup, ebn0_db);
    std::uint64_t bits = 0, errors = 0, ferr = 0;
    for (int f = 0; f < n_frames; ++f) {
        FrameOutcome o = simulate_frame(setup, snr, seed, std::uint64_t(f));
        bits += o.bits;
        errors += o.errors;
        ferr += o.errors > 0 ? 1 : 0;
    }
    return finish(setup, ebn0_db, bits, errors, std::uint64_t(n_frames), ferr);
}

} // namespace isac::comms
