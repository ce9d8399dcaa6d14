// waveform.hpp - OFDM, chirp, AAC-OFDM and CM-OFDM synthesis on the NR grid
//
//   OFDM   s(l)  per-symbol IDFT (1/sqrt(N)) with cyclic prefix
//   chirp  c(l) = q exp(j pi beta (l Ts)^2)
//   AAC    a(l) = (1 - alpha) s(l) + alpha c(l)
//   CM     k(l) = s(l) c(l) on the chirp-covered resource elements
//
// A chirp confined to one OFDM symbol is generated over the N useful
// samples and cyclically extended like the data, so it sweeps its band in
// T = 1/df.  Slot chirps are continuous over 14 symbols including their
// cyclic prefixes and sweep the band in 14 T_o.

#pragma once

#include "isac/types.hpp"
#include <random>
#include <span>

namespace isac::waveform {

enum class Modulation { QPSK };
enum class Scheme { OFDM, AAC, CM };
enum class ChirpMode { PerSymbol, PerSlot, Hybrid };
enum class HybridSlot { None, Symbol, Slot };
enum class PaprScope { Symbol, Whole };

inline constexpr int kSymbolsPerSlot = 14;

// NR FR2 durations at 120 kHz: useful 8.33 us, cyclic prefix 0.57 us.
inline constexpr double kUsefulDurationUs = 8.33;
inline constexpr double kCpDurationUs = 0.57;

int default_cp_samples(int n_subcarriers);

struct WaveformConfig {
    int n_subcarriers = 1024;          // N
    double subcarrier_spacing_hz = 120e3;
    int cp_samples = 70;               // N_CP
    int n_symbols = 14;                // M
    double carrier_hz = 24e9;
    double alpha = 0.5;
    Modulation modulation = Modulation::QPSK;

    void validate() const;

    double sample_rate_hz() const { return n_subcarriers * subcarrier_spacing_hz; }
    double useful_duration_s() const { return 1.0 / subcarrier_spacing_hz; }
    double symbol_duration_s() const { return useful_duration_s() + cp_samples / sample_rate_hz(); }
    std::size_t symbol_length() const { return std::size_t(n_subcarriers + cp_samples); }
    std::size_t frame_length() const { return symbol_length() * std::size_t(n_symbols); }
    double wavelength_m() const { return kSpeedOfLight / carrier_hz; }

    // NR numerology at 120 kHz with N subcarriers and the matching CP length.
    static WaveformConfig nr(int n_subcarriers, int n_symbols = kSymbolsPerSlot);
};

struct ResourceGrid {
    int n_symbols = 0;
    int n_subcarriers = 0;
    CVector symbols;                      // row-major [m][n]
    std::vector<std::uint8_t> data_mask;  // 1 = payload

    ResourceGrid() = default;
    ResourceGrid(int m, int n);

    Complex& at(int m, int n) { return symbols[std::size_t(m) * n_subcarriers + n]; }
    const Complex& at(int m, int n) const { return symbols[std::size_t(m) * n_subcarriers + n]; }
    bool is_data(int m, int n) const { return data_mask[std::size_t(m) * n_subcarriers + n] != 0; }
    std::span<const Complex> row(int m) const {
        return {symbols.data() + std::size_t(m) * n_subcarriers, std::size_t(n_subcarriers)};
    }
    std::size_t data_count() const;
};

struct TimeSignal {
    CVector samples;
    double sample_rate_hz = 0.0;
    double t0_s = 0.0;

    std::size_t size() const { return samples.size(); }
};

struct ChirpRegion {
    int start_subcarrier = 0;  // n_i
    int end_subcarrier = 0;    // n_j, exclusive
    int start_symbol = 0;
    int n_symbols = 1;         // m
    // PRS-style comb for CM: only every comb_step-th subcarrier is chirped
    int comb_step = 1;
    int comb_offset = 0;

    bool covers(int m, int n) const;
};

// A contiguous stretch of chirp in time.
struct ChirpSegment {
    int first_symbol = 0;
    int n_symbols = 1;
    bool cyclic = true;  // confined to one symbol, CP copied from the tail
    double rate_hz_per_s = 0.0;
};

struct ChirpPlan {
    std::vector<double> amplitude;  // M x N, q_m(n); empty means 1
    double rate_hz_per_s = 0.0;
    ChirpMode mode = ChirpMode::PerSymbol;
    ChirpRegion region;
    std::vector<HybridSlot> hybrid_pattern;  // one entry per slot of the region

    double amplitude_at(int m, int n, int n_subcarriers) const;
    double bandwidth_hz(const WaveformConfig& cfg) const;
    // T_c of the primary chirp (slot chirps for Hybrid)
    double chirp_duration_s(const WaveformConfig& cfg) const;
    void validate(const WaveformConfig& cfg) const;
};

double chirp_rate(double bandwidth_hz, double duration_s);

ChirpPlan make_chirp_plan(const WaveformConfig& cfg, ChirpMode mode, const ChirpRegion& region,
                          std::vector<HybridSlot> pattern = {});

// Full band over all M symbols.
ChirpPlan full_band_plan(const WaveformConfig& cfg, ChirpMode mode);

// Slots 0 and 4 carry a slot chirp, slots 1 and 5 a one-symbol chirp.
std::vector<HybridSlot> default_hybrid_pattern(int n_slots);

std::vector<ChirpSegment> chirp_segments(const ChirpPlan& plan, const WaveformConfig& cfg);

// Gray QPSK: 00 -> (1+j)/sqrt2, 01 -> (-1+j)/sqrt2, 11 -> (-1-j)/sqrt2, 10 -> (1-j)/sqrt2
CVector qpsk_map(std::span<const std::uint8_t> bits);
Bits qpsk_demap(std::span<const Complex> symbols);

// Known pilot value for resource element (m, n).
Complex reference_symbol(int m, int n);

ResourceGrid random_qpsk_grid(const WaveformConfig& cfg, std::mt19937_64& eng);

TimeSignal ofdm_modulate(const ResourceGrid& grid, const WaveformConfig& cfg);
TimeSignal generate_chirp(const ChirpPlan& plan, const WaveformConfig& cfg);
TimeSignal compose_aac(const TimeSignal& ofdm, const TimeSignal& chirp, double alpha);
TimeSignal compose_cm(const ResourceGrid& grid, const ChirpPlan& plan, const WaveformConfig& cfg);
TimeSignal build_frame(const ResourceGrid& grid, const ChirpPlan& plan, const WaveformConfig& cfg,
                       Scheme scheme);

// Useful (CP-stripped) samples of symbol m.
std::span<const Complex> useful_part(const TimeSignal& x, const WaveformConfig& cfg, int m);

double papr_db(std::span<const Complex> x);
std::vector<double> papr_db(const TimeSignal& x, PaprScope per, const WaveformConfig& cfg);

double alpha_threshold(double g, double e);
double papr_bound(double alpha, double g, double e);

// Per-symbol quantities behind the equal-power AAC comparison.
struct CompositeStats {
    double g = 0.0;         // peak |s| with s at unit power
    double e = 0.0;         // |rho|
    Complex rho;            // (1/N) sum s c*
    double papr_u = 0.0;    // PAPR of a / sqrt(G(alpha)), linear
};

// s is rescaled to unit average power and c must be unit modulus.
CompositeStats composite_stats(std::span<const Complex> s, std::span<const Complex> c, double alpha);

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);
std::string to_string(ChirpMode m);
ChirpMode chirp_mode_from_string(const std::string& s);

} // namespace isac::waveform
